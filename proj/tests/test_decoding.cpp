#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsql/decoding.hpp"
#include "xsql/executor.hpp"
#include "xsql/rng.hpp"
#include "xsql/schema.hpp"

using namespace xsql;

namespace {

Schema schema_with(int num_cols) {
  Schema s;
  for (int i = 0; i < num_cols; ++i) {
    s.columns.push_back({{"c" + std::to_string(i)}, ColumnType::CATEGORICAL});
  }
  return s;
}

std::vector<Real> dist(Rng& rng, int n) {
  std::vector<Real> v(static_cast<std::size_t>(n));
  Real sum = 0.0;
  for (Real& x : v) sum += (x = rng.uniform01() + 1e-3);
  for (Real& x : v) x /= sum;
  return v;
}

HeadDistributions random_heads(Rng& rng, int num_cols, int qlen) {
  HeadDistributions h;
  h.s_col = dist(rng, num_cols);
  h.s_agg = dist(rng, kNumAggregators);
  h.w_num = dist(rng, 4);
  h.w_col = dist(rng, num_cols + 1);
  for (int c = 0; c < num_cols; ++c) {
    h.w_op.push_back(dist(rng, kNumOperators));
    h.val_start.push_back(dist(rng, qlen));
    h.val_end.push_back(dist(rng, qlen));
  }
  return h;
}

std::vector<std::string> question_of(int qlen) {
  std::vector<std::string> q;
  for (int i = 0; i < qlen; ++i) q.push_back("w" + std::to_string(i));
  return q;
}

int argmax_of(const std::vector<Real>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_SUITE("decoding") {

TEST_CASE("decode_span: length one") {
  CHECK(decode_span({1.0}, {1.0}) == std::pair<int, int>{0, 0});
}

TEST_CASE("decode_span: forward mass picks the wide span") {
  CHECK(decode_span({0.9, 0.1}, {0.1, 0.9}) == std::pair<int, int>{0, 1});
}

TEST_CASE("decode_span: ties break toward the smaller start") {
  // (0,0) = 0.1*0.9 = 0.09; (0,1) = 0.1*0.1 = 0.01; (1,1) = 0.9*0.1 = 0.09.
  CHECK(decode_span({0.1, 0.9}, {0.9, 0.1}) == std::pair<int, int>{0, 0});
}

TEST_CASE("decode_span: empty distributions rejected") {
  CHECK_THROWS_AS(decode_span({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(decode_span({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("decode: empty-column winner suppresses the where clause") {
  Rng rng(5);
  int num_cols = 3;
  HeadDistributions h = random_heads(rng, num_cols, 4);
  h.w_col = {0.1, 0.1, 0.1, 0.7};           // empty wins
  h.w_num = {0.05, 0.05, 0.85, 0.05};       // argmax n=3, must be ignored
  DecodeTrace trace;
  SqlQuery q = decode(h, question_of(4), schema_with(num_cols), &trace);
  CHECK(q.conds.empty());
  CHECK(trace.p_empty == doctest::Approx(0.7));
}

TEST_CASE("decode: top-n columns by w_col rank") {
  Rng rng(6);
  int num_cols = 4;
  HeadDistributions h = random_heads(rng, num_cols, 4);
  // Ranking c3 > EMPTY > c1 > c0 > c2.
  h.w_col = {0.10, 0.15, 0.05, 0.40, 0.30};
  h.w_num = {0.1, 0.7, 0.1, 0.1};  // class 1 -> n = 2
  SqlQuery q = decode(h, question_of(4), schema_with(num_cols));
  REQUIRE(q.conds.size() == 2);
  CHECK(q.conds[0].col == 3);
  CHECK(q.conds[1].col == 1);
}

TEST_CASE("decode: single-column schema with one condition") {
  Rng rng(7);
  HeadDistributions h = random_heads(rng, 1, 3);
  h.w_col = {0.9, 0.1};
  h.w_num = {0.9, 0.05, 0.03, 0.02};
  SqlQuery q = decode(h, question_of(3), schema_with(1));
  REQUIRE(q.conds.size() == 1);
  CHECK(q.conds[0].col == 0);
}

TEST_CASE("decode: condition values are the joined span tokens") {
  Rng rng(8);
  HeadDistributions h = random_heads(rng, 1, 4);
  h.w_col = {0.8, 0.2};
  h.w_num = {1.0, 0.0, 0.0, 0.0};
  h.val_start[0] = {0.0, 0.9, 0.1, 0.0};
  h.val_end[0] = {0.0, 0.0, 0.9, 0.1};
  SqlQuery q = decode(h, {"find", "red", "team", "now"}, schema_with(1));
  REQUIRE(q.conds.size() == 1);
  CHECK(q.conds[0].value == "red team");
}

TEST_CASE("decode: schema smaller than predicted n truncates and flags") {
  Rng rng(9);
  HeadDistributions h = random_heads(rng, 2, 3);
  h.w_col = {0.5, 0.3, 0.2};
  h.w_num = {0.0, 0.0, 0.0, 1.0};  // wants n=4, only 2 columns
  DecodeTrace trace;
  SqlQuery q = decode(h, question_of(3), schema_with(2), &trace);
  CHECK(q.conds.size() == 2);
  CHECK(trace.truncated_conds);
}

TEST_CASE("decode: randomized fixtures obey the four decoding rules") {
  Rng rng(1001);
  for (int trial = 0; trial < 300; ++trial) {
    int num_cols = rng.uniform_int(1, 5);
    int qlen = rng.uniform_int(1, 8);
    HeadDistributions h = random_heads(rng, num_cols, qlen);
    Schema schema = schema_with(num_cols);
    std::vector<std::string> question = question_of(qlen);
    SqlQuery q = decode(h, question, schema);

    // (a) empty-column winner => no conditions, whatever w_num says.
    if (argmax_of(h.w_col) == num_cols) {
      CHECK(q.conds.empty());
    } else {
      // (b) otherwise the clause count follows w_num, capped by the schema.
      int want = std::min(argmax_of(h.w_num) + 1, num_cols);
      CHECK(static_cast<int>(q.conds.size()) == want);
    }
    for (const Condition& c : q.conds) {
      // (d) the empty column never appears inside conds.
      CHECK(c.col >= 0);
      CHECK(c.col < num_cols);
    }
    // (c) spans satisfy start <= end for every column's distributions.
    for (int c = 0; c < num_cols; ++c) {
      auto [s, e] = decode_span(h.val_start[static_cast<std::size_t>(c)],
                                h.val_end[static_cast<std::size_t>(c)]);
      CHECK(s <= e);
      CHECK(s >= 0);
      CHECK(e < qlen);
    }
    // Deterministic: a second decode is identical.
    CHECK(decode(h, question, schema) == q);
  }
}

TEST_CASE("eg: qualifying plain decode is returned untouched") {
  Rng rng(21);
  HeadDistributions h = random_heads(rng, 1, 3);
  h.s_agg = {0.9, 0.02, 0.02, 0.02, 0.02, 0.02};  // NONE
  h.w_col = {0.2, 0.8};                            // empty wins -> no conds
  Schema schema = schema_with(1);
  Table t;
  t.id = "t";
  t.header = {"c0"};
  t.col_types = {ColumnType::CATEGORICAL};
  t.rows = {{"x"}, {"y"}};
  DecodeTrace trace;
  SqlQuery plain = decode(h, question_of(3), schema);
  SqlQuery eg = decode_with_eg(h, question_of(3), schema, t, 8, &trace);
  CHECK(eg == plain);
  CHECK_FALSE(trace.eg_replaced);
}

TEST_CASE("eg: empty-result comparison falls back to the next operator") {
  // Question "score above 100" over a score column topping out at 50.
  std::vector<std::string> question = {"score", "above", "100"};
  Schema schema;
  schema.columns = {{{"score"}, ColumnType::NUMERICAL}};
  Table t;
  t.id = "t";
  t.header = {"score"};
  t.col_types = {ColumnType::NUMERICAL};
  t.rows = {{"20"}, {"50"}};

  HeadDistributions h;
  h.s_col = {1.0};
  h.s_agg = {0.9, 0.02, 0.02, 0.02, 0.02, 0.02};  // NONE
  h.w_num = {0.7, 0.1, 0.1, 0.1};
  h.w_col = {0.95, 0.05};
  h.w_op = {{0.1, 0.6, 0.3}};  // argmax ">", runner-up "<"
  h.val_start = {{0.05, 0.05, 0.9}};
  h.val_end = {{0.05, 0.05, 0.9}};

  DecodeTrace trace;
  SqlQuery plain = decode(h, question, schema);
  REQUIRE(plain.conds.size() == 1);
  CHECK(plain.conds[0].op == kOpGt);
  CHECK(plain.conds[0].value == "100");
  CHECK(execute(t, plain).list.empty());  // nonqualifying: empty result

  SqlQuery eg = decode_with_eg(h, question, schema, t, 8, &trace);
  REQUIRE(eg.conds.size() == 1);
  CHECK(eg.conds[0].col == 0);
  CHECK(eg.conds[0].op == kOpLt);  // the highest-scoring qualifying deviation
  CHECK(eg.conds[0].value == "100");
  CHECK(trace.eg_replaced);
  ExecResult r = execute(t, eg);
  CHECK_FALSE(r.error);
  CHECK(r.list.size() == 2);
}

TEST_CASE("eg: when every candidate fails the plain decode comes back") {
  // AVG over a categorical column errors for every candidate.
  std::vector<std::string> question = {"avg", "team", "red"};
  Schema schema;
  schema.columns = {{{"team"}, ColumnType::CATEGORICAL}};
  Table t;
  t.id = "t";
  t.header = {"team"};
  t.col_types = {ColumnType::CATEGORICAL};
  t.rows = {{"blue"}, {"blue"}};

  HeadDistributions h;
  h.s_col = {1.0};
  h.s_agg = {0.01, 0.01, 0.01, 0.01, 0.01, 0.95};  // AVG
  h.w_num = {0.8, 0.1, 0.05, 0.05};
  h.w_col = {0.9, 0.1};
  h.w_op = {{0.5, 0.3, 0.2}};
  h.val_start = {{0.05, 0.05, 0.9}};
  h.val_end = {{0.05, 0.05, 0.9}};

  DecodeTrace trace;
  SqlQuery plain = decode(h, question, schema);
  SqlQuery eg = decode_with_eg(h, question, schema, t, 8, &trace);
  CHECK(eg == plain);
  CHECK_FALSE(trace.eg_replaced);
}

TEST_CASE("eg: randomized runs keep the replacement contract") {
  Rng rng(2024);
  const std::vector<std::string> words = {"red", "blue", "gold", "iron"};
  for (int trial = 0; trial < 200; ++trial) {
    int num_cols = rng.uniform_int(1, 4);
    Schema schema = schema_with(num_cols);
    Table t;
    t.id = "t";
    for (int c = 0; c < num_cols; ++c) {
      t.header.push_back("c" + std::to_string(c));
      bool numeric = rng.uniform01() < 0.5;
      t.col_types.push_back(numeric ? ColumnType::NUMERICAL : ColumnType::CATEGORICAL);
      schema.columns[static_cast<std::size_t>(c)].ctype = t.col_types.back();
    }
    int n_rows = rng.uniform_int(1, 5);
    for (int r = 0; r < n_rows; ++r) {
      std::vector<std::string> row;
      for (int c = 0; c < num_cols; ++c) {
        if (t.col_types[static_cast<std::size_t>(c)] == ColumnType::NUMERICAL) {
          row.push_back(std::to_string(rng.uniform_int(0, 30)));
        } else {
          row.push_back(words[static_cast<std::size_t>(rng.uniform_int(0, 3))]);
        }
      }
      t.rows.push_back(row);
    }
    int qlen = rng.uniform_int(1, 6);
    std::vector<std::string> question;
    for (int i = 0; i < qlen; ++i) {
      if (rng.uniform01() < 0.5) {
        question.push_back(std::to_string(rng.uniform_int(0, 30)));
      } else {
        question.push_back(words[static_cast<std::size_t>(rng.uniform_int(0, 3))]);
      }
    }
    HeadDistributions h = random_heads(rng, num_cols, qlen);

    SqlQuery plain = decode(h, question, schema);
    DecodeTrace trace;
    SqlQuery eg = decode_with_eg(h, question, schema, t, 8, &trace);
    if (trace.eg_replaced) {
      CHECK_FALSE(lf_match(eg, plain));
      // The plain decode must have been rejected and the replacement accepted.
      ExecResult rp = execute(t, plain);
      bool plain_ok = !rp.error && (rp.is_scalar ? (plain.agg != kAggCount || rp.scalar > 0.0)
                                                 : !rp.list.empty());
      CHECK_FALSE(plain_ok);
      ExecResult re = execute(t, eg);
      CHECK_FALSE(re.error);
      if (!re.is_scalar) CHECK_FALSE(re.list.empty());
      if (re.is_scalar && eg.agg == kAggCount) CHECK(re.scalar > 0.0);
    } else {
      CHECK(eg == plain);
    }
    // Deterministic rerun.
    CHECK(decode_with_eg(h, question, schema, t, 8) == eg);
  }
}

}  // TEST_SUITE
