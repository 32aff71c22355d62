#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "xsql/adam.hpp"
#include "xsql/checkpoint.hpp"
#include "xsql/data.hpp"
#include "xsql/decoding.hpp"
#include "xsql/metrics.hpp"
#include "xsql/model.hpp"
#include "xsql/vocab.hpp"

namespace xsql {

/// Everything a run needs, parsed from a key=value config file plus flag
/// overrides.
struct RunConfig {
  ModelConfig model;
  AdamConfig adam;
  int batch_size = 16;
  int epochs = 30;
  std::uint64_t seed = 1;
  std::string train_examples;
  std::string train_tables;
  std::string dev_examples;
  std::string dev_tables;
  bool eg = false;
  int beam_k = 8;
  std::string checkpoint_path;  // train: resume/state file; eval/predict: model file
  std::string out_path;         // train: best checkpoint; eval: metrics JSON
  int log_interval = 50;
  Real target_train_acc = 0.0;  // early-stop threshold on train acc_lf; 0 disables
};

/// key=value lines, '#' comments and blank lines ignored; unknown keys are
/// errors. `vocab_size` is accepted so checkpoint config snapshots round-trip.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
/// Canonical text form; parse(serialize(c)) == c field-by-field.
std::string serialize_run_config(const RunConfig& config);

/// A model plus the vocabulary it was trained with.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Vocab> vocab;
  std::unique_ptr<XSqlModel> model;
  std::optional<TrainerState> trainer;
};

LoadedModel model_from_checkpoint(const std::string& path);

/// Decodes every example and scores it. Pure given (model, dataset, flags).
MetricsReport evaluate_model(XSqlModel& model, const Vocab& vocab, const Dataset& dataset,
                             bool eg, int beam_k);

struct TrainResult {
  int epochs_run = 0;
  double best_dev_acc_lf = -1.0;
  Real final_train_loss = 0.0;
};

/// Shuffled mini-batch Adam on the composite loss. Deterministic given
/// (seed, config, data): per-epoch RNG streams are derived from the seed, and
/// parameters plus optimizer state are rounded to 32-bit floats at every
/// epoch boundary, so resuming from the state checkpoint continues the exact
/// trajectory. Saves the best-dev-acc_lf checkpoint to `out_path` and the
/// resumable state to `checkpoint_path` after every epoch.
TrainResult train_model(const RunConfig& config, std::ostream& log);

/// Canonical SQL rendering: SELECT <agg>(<col>) FROM t [WHERE c <op> v AND ...]
std::string render_sql(const SqlQuery& q, const std::vector<std::string>& column_names);

struct Prediction {
  SqlQuery query;
  std::string sql_text;
  DecodeTrace trace;
};

Prediction predict_one(XSqlModel& model, const Vocab& vocab, const std::string& question,
                       const Table& table, bool eg, int beam_k);

}  // namespace xsql
