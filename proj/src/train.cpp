#include "xsql/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xsql/text.hpp"

namespace xsql {

namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974;  // distinct from epoch salts 0, 1, ...

std::string real_to_string(Real v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    std::size_t lo = s.find_first_not_of(" \t\r");
    std::size_t hi = s.find_last_not_of(" \t\r");
    return lo == std::string::npos ? std::string() : s.substr(lo, hi - lo + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + stripped + "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "d") c.model.encoder.d = std::stoi(value);
      else if (key == "layers") c.model.encoder.layers = std::stoi(value);
      else if (key == "heads") c.model.encoder.heads = std::stoi(value);
      else if (key == "ffn_mult") c.model.encoder.ffn_mult = std::stoi(value);
      else if (key == "max_seq_len") c.model.encoder.max_seq_len = std::stoi(value);
      else if (key == "vocab_size") c.model.encoder.vocab_size = std::stoi(value);
      else if (key == "dropout") c.model.encoder.dropout = std::stod(value);
      else if (key == "m") c.model.m = std::stoi(value);
      else if (key == "lr") c.adam.lr = std::stod(value);
      else if (key == "beta1") c.adam.beta1 = std::stod(value);
      else if (key == "beta2") c.adam.beta2 = std::stod(value);
      else if (key == "eps") c.adam.eps = std::stod(value);
      else if (key == "batch_size") c.batch_size = std::stoi(value);
      else if (key == "epochs") c.epochs = std::stoi(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "train_examples") c.train_examples = value;
      else if (key == "train_tables") c.train_tables = value;
      else if (key == "dev_examples") c.dev_examples = value;
      else if (key == "dev_tables") c.dev_tables = value;
      else if (key == "eg") c.eg = parse_bool(value, key);
      else if (key == "beam_k") c.beam_k = std::stoi(value);
      else if (key == "checkpoint") c.checkpoint_path = value;
      else if (key == "out") c.out_path = value;
      else if (key == "log_interval") c.log_interval = std::stoi(value);
      else if (key == "target_train_acc") c.target_train_acc = std::stod(value);
      else throw std::invalid_argument("config line " + std::to_string(line_no) +
                                       ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": bad value for " + key + ": '" + value + "'");
    }
  }
  if (c.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
  if (c.epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (c.beam_k < 1) throw std::invalid_argument("config: beam_k must be >= 1");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string serialize_run_config(const RunConfig& c) {
  std::ostringstream out;
  out << "d=" << c.model.encoder.d << "\n";
  out << "layers=" << c.model.encoder.layers << "\n";
  out << "heads=" << c.model.encoder.heads << "\n";
  out << "ffn_mult=" << c.model.encoder.ffn_mult << "\n";
  out << "max_seq_len=" << c.model.encoder.max_seq_len << "\n";
  out << "vocab_size=" << c.model.encoder.vocab_size << "\n";
  out << "dropout=" << real_to_string(c.model.encoder.dropout) << "\n";
  out << "m=" << c.model.m << "\n";
  out << "lr=" << real_to_string(c.adam.lr) << "\n";
  out << "beta1=" << real_to_string(c.adam.beta1) << "\n";
  out << "beta2=" << real_to_string(c.adam.beta2) << "\n";
  out << "eps=" << real_to_string(c.adam.eps) << "\n";
  out << "batch_size=" << c.batch_size << "\n";
  out << "epochs=" << c.epochs << "\n";
  out << "seed=" << c.seed << "\n";
  out << "train_examples=" << c.train_examples << "\n";
  out << "train_tables=" << c.train_tables << "\n";
  out << "dev_examples=" << c.dev_examples << "\n";
  out << "dev_tables=" << c.dev_tables << "\n";
  out << "eg=" << (c.eg ? "true" : "false") << "\n";
  out << "beam_k=" << c.beam_k << "\n";
  out << "checkpoint=" << c.checkpoint_path << "\n";
  out << "out=" << c.out_path << "\n";
  out << "log_interval=" << c.log_interval << "\n";
  out << "target_train_acc=" << real_to_string(c.target_train_acc) << "\n";
  return out.str();
}

LoadedModel model_from_checkpoint(const std::string& path) {
  CheckpointData data = load_checkpoint(path);
  LoadedModel lm;
  lm.config = parse_run_config(data.config_text);
  lm.vocab = std::make_unique<Vocab>(Vocab::from_tokens(data.vocab_tokens));
  if (lm.config.model.encoder.vocab_size != lm.vocab->size()) {
    throw std::runtime_error("checkpoint: config vocab_size " +
                             std::to_string(lm.config.model.encoder.vocab_size) +
                             " disagrees with stored vocabulary of " +
                             std::to_string(lm.vocab->size()));
  }
  lm.model = std::make_unique<XSqlModel>(lm.config.model, /*init_seed=*/0);
  restore_parameters(lm.model->store, data);
  lm.trainer = std::move(data.trainer);
  return lm;
}

MetricsReport evaluate_model(XSqlModel& model, const Vocab& vocab, const Dataset& dataset,
                             bool eg, int beam_k) {
  MetricsReport report;
  report.counters = dataset.counters;
  for (const ProcessedExample& ex : dataset.examples) {
    InputSequence seq = serialize_example(ex.question_tokens, ex.schema, vocab,
                                          model.config.encoder.max_seq_len);
    Graph g;
    HeadDistributions heads = inference_forward(g, model, seq, ex.schema);
    const Table& table = dataset.table_of(ex);
    SqlQuery pred = eg ? decode_with_eg(heads, ex.question_tokens, ex.schema, table, beam_k)
                       : decode(heads, ex.question_tokens, ex.schema);
    report.accumulate(table, pred, gold_to_query(ex.gold));
  }
  report.finalize();
  return report;
}

namespace {

CheckpointData make_checkpoint_data(const RunConfig& config, const Vocab& vocab,
                                    const ParameterStore& store) {
  CheckpointData data;
  data.config_text = serialize_run_config(config);
  data.vocab_tokens = vocab.tokens();
  data.params = snapshot_parameters(store);
  return data;
}

}  // namespace

TrainResult train_model(const RunConfig& input_config, std::ostream& log) {
  RunConfig config = input_config;
  if (config.train_examples.empty() || config.train_tables.empty()) {
    throw std::invalid_argument("train: train_examples and train_tables are required");
  }
  Dataset train = load_dataset(config.train_examples, config.train_tables,
                               config.model.encoder.max_seq_len, /*require_spans=*/true);
  if (train.examples.empty()) {
    throw std::runtime_error("train: no usable examples in " + config.train_examples);
  }
  bool has_dev = !config.dev_examples.empty() && !config.dev_tables.empty();
  Dataset dev;
  if (has_dev) {
    dev = load_dataset(config.dev_examples, config.dev_tables, config.model.encoder.max_seq_len,
                       /*require_spans=*/false);
  }

  std::unique_ptr<Vocab> vocab;
  std::unique_ptr<XSqlModel> model;
  AdamState adam;
  int start_epoch = 0;
  double best_dev = -1.0;

  bool resume = !config.checkpoint_path.empty() && std::filesystem::exists(config.checkpoint_path);
  if (resume) {
    LoadedModel lm = model_from_checkpoint(config.checkpoint_path);
    if (!lm.trainer) {
      throw std::runtime_error("train: checkpoint " + config.checkpoint_path +
                               " carries no trainer state to resume from");
    }
    vocab = std::move(lm.vocab);
    model = std::move(lm.model);
    config.model = lm.config.model;
    adam.t = lm.trainer->adam_t;
    adam.m = std::move(lm.trainer->adam_m);
    adam.v = std::move(lm.trainer->adam_v);
    start_epoch = lm.trainer->next_epoch;
    best_dev = lm.trainer->best_dev_acc;
    log << "resuming from " << config.checkpoint_path << " at epoch " << start_epoch << "\n";
  } else {
    std::vector<std::vector<std::string>> corpus;
    for (const ProcessedExample& ex : train.examples) {
      corpus.push_back(ex.question_tokens);
      for (const SchemaColumn& col : ex.schema.columns) corpus.push_back(col.name_tokens);
    }
    vocab = std::make_unique<Vocab>(Vocab::build(corpus));
    config.model.encoder.vocab_size = vocab->size();
    model = std::make_unique<XSqlModel>(config.model, derive_seed(config.seed, kInitSalt));
    adam = adam_init(model->store);
  }

  std::vector<InputSequence> sequences;
  sequences.reserve(train.examples.size());
  for (const ProcessedExample& ex : train.examples) {
    sequences.push_back(serialize_example(ex.question_tokens, ex.schema, *vocab,
                                          config.model.encoder.max_seq_len));
  }

  int n = static_cast<int>(train.examples.size());
  TrainResult result;
  result.best_dev_acc_lf = best_dev;

  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    Rng erng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    erng.shuffle(order);

    Real epoch_loss = 0.0;
    int steps = 0;
    for (int batch_start = 0; batch_start < n; batch_start += config.batch_size) {
      int bsz = std::min(config.batch_size, n - batch_start);
      model->store.zero_grads();
      LossParts batch_parts;
      for (int b = 0; b < bsz; ++b) {
        int idx = order[static_cast<std::size_t>(batch_start + b)];
        const ProcessedExample& ex = train.examples[static_cast<std::size_t>(idx)];
        Graph g;
        LossParts parts;
        NodeId loss = training_loss(g, *model, sequences[static_cast<std::size_t>(idx)],
                                    ex.schema, ex.gold, /*train=*/true, &erng, &parts);
        batch_parts.s_col += parts.s_col;
        batch_parts.s_agg += parts.s_agg;
        batch_parts.w_num += parts.w_num;
        batch_parts.w_col += parts.w_col;
        batch_parts.w_op += parts.w_op;
        batch_parts.w_val += parts.w_val;
        batch_parts.total += parts.total;
        g.backward(loss, 1.0 / static_cast<Real>(bsz));
      }
      Real inv = 1.0 / static_cast<Real>(bsz);
      Real batch_loss = batch_parts.total * inv;
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " step " + std::to_string(steps) +
                                 " (diverged; lower the learning rate)");
      }
      adam_step(model->store, adam, config.adam);
      epoch_loss += batch_loss;
      ++steps;
      if (config.log_interval > 0 && steps % config.log_interval == 0) {
        log << "{\"epoch\":" << epoch << ",\"step\":" << steps
            << ",\"loss\":" << batch_loss
            << ",\"s_col\":" << batch_parts.s_col * inv
            << ",\"s_agg\":" << batch_parts.s_agg * inv
            << ",\"w_num\":" << batch_parts.w_num * inv
            << ",\"w_col\":" << batch_parts.w_col * inv
            << ",\"w_op\":" << batch_parts.w_op * inv
            << ",\"w_val\":" << batch_parts.w_val * inv << "}\n";
      }
    }
    result.final_train_loss = epoch_loss / static_cast<Real>(std::max(steps, 1));
    result.epochs_run = epoch + 1;

    // Freeze the trajectory at 32-bit precision so a resumed run continues
    // bit-identically from the saved state.
    quantize_store_to_f32(model->store);
    for (Tensor& t : adam.m) quantize_to_f32(t);
    for (Tensor& t : adam.v) quantize_to_f32(t);

    double dev_acc = -1.0;
    if (has_dev) {
      dev_acc = evaluate_model(*model, *vocab, dev, /*eg=*/false, config.beam_k).acc_lf;
    }
    double train_acc = -1.0;
    if (config.target_train_acc > 0.0) {
      train_acc = evaluate_model(*model, *vocab, train, /*eg=*/false, config.beam_k).acc_lf;
    }
    log << "epoch " << epoch << " mean_loss " << result.final_train_loss;
    if (dev_acc >= 0.0) log << " dev_acc_lf " << dev_acc;
    if (train_acc >= 0.0) log << " train_acc_lf " << train_acc;
    log << "\n";

    bool improved = has_dev ? dev_acc > best_dev : true;
    if (has_dev && dev_acc > best_dev) best_dev = dev_acc;
    result.best_dev_acc_lf = best_dev;

    if (!config.checkpoint_path.empty()) {
      CheckpointData data = make_checkpoint_data(config, *vocab, model->store);
      TrainerState ts;
      ts.adam_t = adam.t;
      ts.next_epoch = epoch + 1;
      ts.best_dev_acc = best_dev;
      ts.adam_m = adam.m;
      ts.adam_v = adam.v;
      data.trainer = std::move(ts);
      save_checkpoint(config.checkpoint_path, data);
    }
    if (!config.out_path.empty() && improved) {
      save_checkpoint(config.out_path, make_checkpoint_data(config, *vocab, model->store));
    }
    if (config.target_train_acc > 0.0 && train_acc >= config.target_train_acc) {
      log << "reached target train accuracy " << train_acc << " at epoch " << epoch << "\n";
      break;
    }
  }
  return result;
}

std::string render_sql(const SqlQuery& q, const std::vector<std::string>& column_names) {
  auto name = [&column_names](int col) {
    return column_names.at(static_cast<std::size_t>(col));
  };
  std::string out = "SELECT ";
  if (q.agg == kAggNone) {
    out += name(q.select_col);
  } else {
    out += std::string(kAggregatorNames[static_cast<std::size_t>(q.agg)]) + "(" +
           name(q.select_col) + ")";
  }
  out += " FROM t";
  for (std::size_t i = 0; i < q.conds.size(); ++i) {
    out += i == 0 ? " WHERE " : " AND ";
    const Condition& c = q.conds[i];
    out += name(c.col) + " " + kOperatorNames[static_cast<std::size_t>(c.op)] + " " + c.value;
  }
  return out;
}

Prediction predict_one(XSqlModel& model, const Vocab& vocab, const std::string& question,
                       const Table& table, bool eg, int beam_k) {
  std::vector<std::string> tokens = tokenize(question);
  Schema schema = schema_from_table(table);
  InputSequence seq =
      serialize_example(tokens, schema, vocab, model.config.encoder.max_seq_len);
  Graph g;
  HeadDistributions heads = inference_forward(g, model, seq, schema);
  Prediction pred;
  pred.query = eg ? decode_with_eg(heads, tokens, schema, table, beam_k, &pred.trace)
                  : decode(heads, tokens, schema, &pred.trace);
  pred.sql_text = render_sql(pred.query, table.header);
  return pred;
}

}  // namespace xsql
