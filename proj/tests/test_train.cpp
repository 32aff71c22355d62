#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xsql/data.hpp"
#include "xsql/executor.hpp"
#include "xsql/metrics.hpp"
#include "xsql/rng.hpp"
#include "xsql/train.hpp"

using namespace xsql;

// ---------------------------------------------------------------------------
// Test-only parser for the canonical SQL rendering, used to round-trip
// predictions: SELECT <agg>(<col>) FROM t WHERE <col> <op> <val> AND ...
// ---------------------------------------------------------------------------
namespace {

int column_index(const std::string& name, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw std::runtime_error("parse_sql: unknown column '" + name + "'");
}

SqlQuery parse_sql(const std::string& text, const std::vector<std::string>& header) {
  const std::string select_kw = "SELECT ";
  const std::string from_kw = " FROM t";
  REQUIRE(text.rfind(select_kw, 0) == 0);
  std::size_t from_at = text.find(from_kw);
  REQUIRE(from_at != std::string::npos);

  SqlQuery q;
  std::string sel = text.substr(select_kw.size(), from_at - select_kw.size());
  q.agg = kAggNone;
  for (int a = 1; a < kNumAggregators; ++a) {
    std::string prefix = std::string(kAggregatorNames[static_cast<std::size_t>(a)]) + "(";
    if (sel.rfind(prefix, 0) == 0 && sel.back() == ')') {
      q.agg = a;
      sel = sel.substr(prefix.size(), sel.size() - prefix.size() - 1);
      break;
    }
  }
  q.select_col = column_index(sel, header);

  std::string rest = text.substr(from_at + from_kw.size());
  if (!rest.empty()) {
    const std::string where_kw = " WHERE ";
    REQUIRE(rest.rfind(where_kw, 0) == 0);
    rest = rest.substr(where_kw.size());
    std::vector<std::string> clauses;
    std::size_t pos = 0;
    while (true) {
      std::size_t and_at = rest.find(" AND ", pos);
      if (and_at == std::string::npos) {
        clauses.push_back(rest.substr(pos));
        break;
      }
      clauses.push_back(rest.substr(pos, and_at - pos));
      pos = and_at + 5;
    }
    for (const std::string& clause : clauses) {
      Condition c;
      std::size_t best = std::string::npos;
      for (int op = 0; op < kNumOperators; ++op) {
        std::string needle = std::string(" ") + kOperatorNames[static_cast<std::size_t>(op)] + " ";
        std::size_t at = clause.find(needle);
        if (at != std::string::npos && at < best) {
          best = at;
          c.op = op;
        }
      }
      REQUIRE(best != std::string::npos);
      c.col = column_index(clause.substr(0, best), header);
      c.value = clause.substr(best + 3);
      q.conds.push_back(c);
    }
  }
  return q;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Small-model config text trained on the given files.
std::string small_config(const std::string& examples, const std::string& tables, int epochs,
                         const std::string& extra = "") {
  std::ostringstream out;
  out << "d=16\nlayers=1\nheads=2\nffn_mult=2\nmax_seq_len=64\ndropout=0.1\n"
      << "lr=0.003\nbatch_size=8\nepochs=" << epochs << "\nseed=5\n"
      << "train_examples=" << examples << "\ntrain_tables=" << tables << "\n"
      << extra;
  return out.str();
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("config: defaults survive an empty file") {
  RunConfig c = parse_run_config("");
  CHECK(c.model.encoder.d == 64);
  CHECK(c.model.encoder.layers == 2);
  CHECK(c.model.encoder.heads == 4);
  CHECK(c.model.encoder.max_seq_len == 96);
  CHECK(c.model.m == 0);
  CHECK(c.adam.lr == 1e-3);
  CHECK(c.batch_size == 16);
  CHECK(c.seed == 1);
  CHECK_FALSE(c.eg);
  CHECK(c.beam_k == 8);
}

TEST_CASE("config: overrides, comments, and blank lines") {
  RunConfig c = parse_run_config(
      "# a comment\n"
      "\n"
      "d = 32\n"
      "lr=0.01\n"
      "eg=true\n"
      "beam_k=4\n"
      "train_examples=data/ex.jsonl\n"
      "target_train_acc=0.95\n");
  CHECK(c.model.encoder.d == 32);
  CHECK(c.adam.lr == 0.01);
  CHECK(c.eg);
  CHECK(c.beam_k == 4);
  CHECK(c.train_examples == "data/ex.jsonl");
  CHECK(c.target_train_acc == 0.95);
}

TEST_CASE("config: malformed input is rejected") {
  CHECK_THROWS_AS(parse_run_config("nonsense_key=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("just a line\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("d=abc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("eg=maybe\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config("batch_size=0\n"), std::invalid_argument);
}

TEST_CASE("config: serialize -> parse round-trip") {
  RunConfig c;
  c.model.encoder.d = 24;
  c.model.encoder.vocab_size = 111;
  c.model.m = 12;
  c.adam.lr = 0.00125;
  c.epochs = 9;
  c.seed = 987654321;
  c.train_examples = "a.jsonl";
  c.dev_tables = "b.jsonl";
  c.eg = true;
  c.beam_k = 5;
  c.checkpoint_path = "state.bin";
  c.out_path = "best.bin";
  c.target_train_acc = 0.875;
  RunConfig back = parse_run_config(serialize_run_config(c));
  CHECK(back.model.encoder.d == 24);
  CHECK(back.model.encoder.vocab_size == 111);
  CHECK(back.model.m == 12);
  CHECK(back.adam.lr == 0.00125);
  CHECK(back.epochs == 9);
  CHECK(back.seed == 987654321);
  CHECK(back.train_examples == "a.jsonl");
  CHECK(back.dev_tables == "b.jsonl");
  CHECK(back.eg);
  CHECK(back.beam_k == 5);
  CHECK(back.checkpoint_path == "state.bin");
  CHECK(back.out_path == "best.bin");
  CHECK(back.target_train_acc == 0.875);
}

TEST_CASE("render_sql: aggregators and where clauses") {
  std::vector<std::string> header = {"team", "points"};
  SqlQuery bare;
  bare.select_col = 0;
  bare.agg = kAggNone;
  CHECK(render_sql(bare, header) == "SELECT team FROM t");

  SqlQuery agg;
  agg.select_col = 1;
  agg.agg = kAggMax;
  agg.conds = {{0, kOpEq, "red"}, {1, kOpGt, "5"}};
  CHECK(render_sql(agg, header) == "SELECT MAX(points) FROM t WHERE team = red AND points > 5");
}

TEST_CASE("render_sql: round-trips through the canonical parser") {
  std::vector<std::string> header = {"team", "points", "rank"};
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    SqlQuery q;
    q.select_col = rng.uniform_int(0, 2);
    q.agg = rng.uniform_int(0, 5);
    int n = rng.uniform_int(0, 3);
    for (int i = 0; i < n && i < 3; ++i) {
      Condition c;
      c.col = i;  // distinct columns
      c.op = rng.uniform_int(0, 2);
      c.value = c.op == kOpEq ? "red sox" : std::to_string(rng.uniform_int(0, 99));
      q.conds.push_back(c);
    }
    CHECK(parse_sql(render_sql(q, header), header) == q);
  }
}

TEST_CASE("metrics: gold replayed as prediction scores one everywhere") {
  generate_synthetic({30, 4242}, "mt_ex.jsonl", "mt_tab.jsonl");
  Dataset ds = load_dataset("mt_ex.jsonl", "mt_tab.jsonl", 96);
  REQUIRE(ds.counters.loaded == 30);
  MetricsReport report;
  report.counters = ds.counters;
  for (const ProcessedExample& ex : ds.examples) {
    SqlQuery gold = gold_to_query(ex.gold);
    report.accumulate(ds.table_of(ex), gold, gold);
  }
  report.finalize();
  CHECK(report.n_examples == 30);
  CHECK(report.acc_lf == 1.0);
  CHECK(report.acc_ex == 1.0);
  CHECK(report.s_col == 1.0);
  CHECK(report.s_agg == 1.0);
  CHECK(report.w_num == 1.0);
  CHECK(report.w_col == 1.0);
  CHECK(report.w_op == 1.0);
  CHECK(report.w_val == 1.0);
  CHECK(report.to_json() == report.to_json());
  std::remove("mt_ex.jsonl");
  std::remove("mt_tab.jsonl");
}

TEST_CASE("metrics: logical-form hit implies every sub-task hit") {
  generate_synthetic({40, 11}, "mi_ex.jsonl", "mi_tab.jsonl");
  Dataset ds = load_dataset("mi_ex.jsonl", "mi_tab.jsonl", 96);
  Rng rng(13);
  for (const ProcessedExample& ex : ds.examples) {
    SqlQuery gold = gold_to_query(ex.gold);
    // Mix exact replays with random corruptions.
    SqlQuery pred = gold;
    if (rng.uniform01() < 0.5 && !pred.conds.empty()) {
      pred.conds[0].op = (pred.conds[0].op + 1) % kNumOperators;
    }
    if (rng.uniform01() < 0.3) pred.agg = (pred.agg + 1) % kNumAggregators;
    SubtaskHits hits = score_example(ds.table_of(ex), pred, gold);
    if (hits.lf) {
      CHECK(hits.s_col);
      CHECK(hits.s_agg);
      CHECK(hits.w_num);
      CHECK(hits.w_col);
      CHECK(hits.w_op);
      CHECK(hits.w_val);
      if (!execute(ds.table_of(ex), gold).error) CHECK(hits.ex);
    }
  }
  std::remove("mi_ex.jsonl");
  std::remove("mi_tab.jsonl");
}

TEST_CASE("train: one example memorized within 200 steps") {
  write_file("ov_tab.jsonl",
             R"({"id":"t0","header":["team","points"],"types":["text","real"],)"
             R"("rows":[["red","10"],["blue","20"]]})"
             "\n");
  write_file("ov_ex.jsonl",
             R"({"question":"count points for red","table_id":"t0",)"
             R"("sql":{"sel":1,"agg":3,"conds":[[0,0,"red"]]}})"
             "\n");
  RunConfig config = parse_run_config(
      "d=16\nlayers=1\nheads=2\nffn_mult=2\nmax_seq_len=32\ndropout=0\n"
      "lr=0.005\nbatch_size=1\nepochs=200\nseed=7\n"
      "train_examples=ov_ex.jsonl\ntrain_tables=ov_tab.jsonl\nout=ov_best.bin\n");
  std::ostringstream log;
  TrainResult result = train_model(config, log);
  CHECK(result.epochs_run == 200);
  CHECK(result.final_train_loss < 0.01);

  // The memorized example comes back out of the checkpoint.
  LoadedModel lm = model_from_checkpoint("ov_best.bin");
  Dataset ds = load_dataset("ov_ex.jsonl", "ov_tab.jsonl", 32);
  MetricsReport report = evaluate_model(*lm.model, *lm.vocab, ds, false, 8);
  CHECK(report.acc_lf == 1.0);
  CHECK(report.acc_ex == 1.0);

  // predict_one renders the memorized query; the rendering parses back.
  const Table& table = ds.tables.at("t0");
  Prediction pred = predict_one(*lm.model, *lm.vocab, "count points for red", table, false, 8);
  CHECK(parse_sql(pred.sql_text, table.header) == pred.query);
  CHECK(pred.query == gold_to_query(ds.examples[0].gold));
  CHECK(pred.trace.p_select > 0.5);

  // Question longer than max_seq_len is a hard error.
  std::string long_question;
  for (int i = 0; i < 40; ++i) long_question += "points ";
  CHECK_THROWS(predict_one(*lm.model, *lm.vocab, long_question, table, false, 8));

  std::remove("ov_tab.jsonl");
  std::remove("ov_ex.jsonl");
  std::remove("ov_best.bin");
}

TEST_CASE("train: same seed twice gives identical checkpoints") {
  generate_synthetic({24, 321}, "det_ex.jsonl", "det_tab.jsonl");
  RunConfig config = parse_run_config(
      small_config("det_ex.jsonl", "det_tab.jsonl", 2,
                   "checkpoint=det_state.bin\nout=det_best.bin\n"));
  std::ostringstream log1;
  train_model(config, log1);
  std::string state1 = read_file("det_state.bin");
  std::string best1 = read_file("det_best.bin");
  std::remove("det_state.bin");
  std::remove("det_best.bin");

  std::ostringstream log2;
  train_model(config, log2);
  CHECK(read_file("det_state.bin") == state1);
  CHECK(read_file("det_best.bin") == best1);
  CHECK(log1.str() == log2.str());
  std::remove("det_state.bin");
  std::remove("det_best.bin");
  std::remove("det_ex.jsonl");
  std::remove("det_tab.jsonl");
}

TEST_CASE("train: resuming reproduces the uninterrupted trajectory") {
  generate_synthetic({24, 654}, "res_ex.jsonl", "res_tab.jsonl");
  std::string paths = "checkpoint=res_state.bin\nout=res_best.bin\n";

  // Interrupted: 2 epochs, then resume to 4.
  {
    RunConfig leg1 = parse_run_config(small_config("res_ex.jsonl", "res_tab.jsonl", 2, paths));
    std::ostringstream log;
    TrainResult r1 = train_model(leg1, log);
    CHECK(r1.epochs_run == 2);
    RunConfig leg2 = parse_run_config(small_config("res_ex.jsonl", "res_tab.jsonl", 4, paths));
    TrainResult r2 = train_model(leg2, log);
    CHECK(r2.epochs_run == 4);
  }
  std::string resumed_state = read_file("res_state.bin");
  std::string resumed_best = read_file("res_best.bin");
  std::remove("res_state.bin");
  std::remove("res_best.bin");

  // Uninterrupted: straight 4 epochs under the same paths.
  {
    RunConfig full = parse_run_config(small_config("res_ex.jsonl", "res_tab.jsonl", 4, paths));
    std::ostringstream log;
    TrainResult r = train_model(full, log);
    CHECK(r.epochs_run == 4);
  }
  CHECK(read_file("res_state.bin") == resumed_state);
  CHECK(read_file("res_best.bin") == resumed_best);
  std::remove("res_state.bin");
  std::remove("res_best.bin");
  std::remove("res_ex.jsonl");
  std::remove("res_tab.jsonl");
}

TEST_CASE("train: empty dataset and missing files are errors") {
  write_file("empty_ex.jsonl", "");
  write_file("empty_tab.jsonl", "");
  RunConfig config = parse_run_config(small_config("empty_ex.jsonl", "empty_tab.jsonl", 1));
  std::ostringstream log;
  CHECK_THROWS(train_model(config, log));
  RunConfig no_paths;
  CHECK_THROWS(train_model(no_paths, log));
  std::remove("empty_ex.jsonl");
  std::remove("empty_tab.jsonl");
}

TEST_CASE("eval: execution guidance never lowers execution accuracy") {
  generate_synthetic({32, 31}, "eg_ex.jsonl", "eg_tab.jsonl");
  RunConfig config = parse_run_config(
      small_config("eg_ex.jsonl", "eg_tab.jsonl", 2, "out=eg_best.bin\n"));
  std::ostringstream log;
  train_model(config, log);

  LoadedModel lm = model_from_checkpoint("eg_best.bin");
  Dataset ds = load_dataset("eg_ex.jsonl", "eg_tab.jsonl", 64, /*require_spans=*/false);
  MetricsReport plain = evaluate_model(*lm.model, *lm.vocab, ds, false, 8);
  MetricsReport eg = evaluate_model(*lm.model, *lm.vocab, ds, true, 8);
  CHECK(eg.acc_ex >= plain.acc_ex);
  CHECK(plain.n_examples == 32);
  CHECK(eg.n_examples == 32);

  // eg=false evaluation is a pure function of (checkpoint, dataset).
  MetricsReport again = evaluate_model(*lm.model, *lm.vocab, ds, false, 8);
  CHECK(again.to_json() == plain.to_json());

  std::remove("eg_ex.jsonl");
  std::remove("eg_tab.jsonl");
  std::remove("eg_best.bin");
}

}  // TEST_SUITE
