#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xsql/adam.hpp"
#include "xsql/graph.hpp"

namespace xsql {

/// Optimizer and schedule state carried across an interrupted run.
struct TrainerState {
  std::int64_t adam_t = 0;
  int next_epoch = 0;
  double best_dev_acc = -1.0;
  std::vector<Tensor> adam_m;
  std::vector<Tensor> adam_v;
};

/// In-memory image of a checkpoint file: config snapshot, vocabulary, and
/// parameter blobs in registration order, plus optional trainer state.
struct CheckpointData {
  std::string config_text;
  std::vector<std::string> vocab_tokens;
  std::vector<std::pair<std::string, Tensor>> params;
  std::optional<TrainerState> trainer;
};

/// Rounds every value to the nearest 32-bit float. Applied to parameters and
/// optimizer state at each epoch boundary so that a resumed run (which loads
/// 32-bit blobs) follows the same trajectory as an uninterrupted one.
void quantize_to_f32(Tensor& t);
void quantize_store_to_f32(ParameterStore& store);

/// Binary, little-endian, versioned; parameter values stored as 32-bit
/// floats. save(load(x)) is byte-identical to x.
void save_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::string& path);

/// Copies loaded blobs into a live parameter store; names, order, and shapes
/// must match exactly.
void restore_parameters(ParameterStore& store, const CheckpointData& data);

/// Snapshots a live store into checkpoint blobs.
std::vector<std::pair<std::string, Tensor>> snapshot_parameters(const ParameterStore& store);

}  // namespace xsql
