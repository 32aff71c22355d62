// Command-line front end: train / eval / predict / gen-data.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "xsql/data.hpp"
#include "xsql/train.hpp"

namespace {

using namespace xsql;

struct CommonFlags {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_path;
  bool has_seed = false;
  std::uint64_t seed = 1;
  bool eg = false;
  bool has_beam_k = false;
  int beam_k = 8;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_train(const CommonFlags& flags) {
  if (flags.config_path.empty()) throw std::runtime_error("train requires --config");
  RunConfig config = load_run_config(flags.config_path);
  if (flags.has_seed) config.seed = flags.seed;
  if (flags.eg) config.eg = true;
  if (flags.has_beam_k) config.beam_k = flags.beam_k;
  if (!flags.checkpoint_path.empty()) config.checkpoint_path = flags.checkpoint_path;
  if (!flags.out_path.empty()) config.out_path = flags.out_path;
  TrainResult result = train_model(config, std::cout);
  std::cout << "trained " << result.epochs_run << " epochs, final mean loss "
            << result.final_train_loss;
  if (result.best_dev_acc_lf >= 0.0) std::cout << ", best dev acc_lf " << result.best_dev_acc_lf;
  std::cout << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& examples_path,
             const std::string& tables_path) {
  if (flags.checkpoint_path.empty()) throw std::runtime_error("eval requires --checkpoint");
  LoadedModel lm = model_from_checkpoint(flags.checkpoint_path);
  Dataset dataset = load_dataset(examples_path, tables_path,
                                 lm.config.model.encoder.max_seq_len, /*require_spans=*/false);
  int beam_k = flags.has_beam_k ? flags.beam_k : lm.config.beam_k;
  MetricsReport report = evaluate_model(*lm.model, *lm.vocab, dataset, flags.eg, beam_k);
  std::cout << report.to_text();
  if (!flags.out_path.empty()) {
    write_file(flags.out_path, report.to_json() + "\n");
    std::cout << "wrote " << flags.out_path << "\n";
  }
  return 0;
}

int cmd_predict(const CommonFlags& flags, const std::string& tables_path,
                const std::string& table_id, const std::string& question) {
  if (flags.checkpoint_path.empty()) throw std::runtime_error("predict requires --checkpoint");
  LoadedModel lm = model_from_checkpoint(flags.checkpoint_path);
  std::map<std::string, Table> tables = load_tables_file(tables_path);
  auto it = tables.find(table_id);
  if (it == tables.end()) {
    throw std::runtime_error("table '" + table_id + "' not found in " + tables_path);
  }
  int beam_k = flags.has_beam_k ? flags.beam_k : lm.config.beam_k;
  Prediction pred = predict_one(*lm.model, *lm.vocab, question, it->second, flags.eg, beam_k);
  std::cout << pred.sql_text << "\n";
  std::cout << "p_select=" << pred.trace.p_select << " p_agg=" << pred.trace.p_agg;
  if (pred.query.conds.empty()) {
    std::cout << " p_empty=" << pred.trace.p_empty;
  } else {
    std::cout << " p_num=" << pred.trace.p_num;
    for (std::size_t i = 0; i < pred.query.conds.size(); ++i) {
      std::cout << " cond" << i << "(col=" << pred.trace.p_cond_col[i]
                << ",op=" << pred.trace.p_cond_op[i]
                << ",span=" << pred.trace.p_cond_span[i] << ")";
    }
  }
  if (pred.trace.eg_replaced) std::cout << " [execution-guided]";
  std::cout << "\n";
  return 0;
}

int cmd_gen_data(int n, std::uint64_t seed, const std::string& out_dir) {
  GeneratorConfig config;
  config.n_examples = n;
  config.seed = seed;
  std::filesystem::create_directories(out_dir);
  std::string examples_path = (std::filesystem::path(out_dir) / "examples.jsonl").string();
  std::string tables_path = (std::filesystem::path(out_dir) / "tables.jsonl").string();
  generate_synthetic(config, examples_path, tables_path);
  std::cout << "wrote " << examples_path << " and " << tables_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-to-SQL semantic parser for single-table queries"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string examples_path;
  std::string tables_path;
  std::string table_id;
  std::string question;
  int gen_n = 200;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "data";

  auto add_common = [&flags](CLI::App* cmd, bool with_config) {
    if (with_config) cmd->add_option("--config", flags.config_path, "run config file");
    cmd->add_option("--checkpoint", flags.checkpoint_path, "checkpoint path");
    cmd->add_option("--out", flags.out_path, "output path");
    cmd->add_option("--seed", flags.seed, "random seed")->each([&flags](const std::string&) {
      flags.has_seed = true;
    });
    cmd->add_flag("--eg", flags.eg, "execution-guided decoding");
    cmd->add_option("--beam-k", flags.beam_k, "EG candidate budget")
        ->each([&flags](const std::string&) { flags.has_beam_k = true; });
  };

  CLI::App* train = app.add_subcommand("train", "train a model from a config file");
  add_common(train, /*with_config=*/true);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  add_common(eval, /*with_config=*/false);
  eval->add_option("--examples", examples_path, "examples JSONL")->required();
  eval->add_option("--tables", tables_path, "tables JSONL")->required();

  CLI::App* predict = app.add_subcommand("predict", "predict SQL for one question");
  add_common(predict, /*with_config=*/false);
  predict->add_option("--tables", tables_path, "tables JSONL")->required();
  predict->add_option("--table-id", table_id, "table id within --tables")->required();
  predict->add_option("--question", question, "natural-language question")->required();

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  gen->add_option("--n", gen_n, "number of examples");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(flags);
    if (eval->parsed()) return cmd_eval(flags, examples_path, tables_path);
    if (predict->parsed()) return cmd_predict(flags, tables_path, table_id, question);
    if (gen->parsed()) return cmd_gen_data(gen_n, gen_seed, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
