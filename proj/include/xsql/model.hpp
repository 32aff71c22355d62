#pragma once

#include <vector>

#include "xsql/encoder.hpp"
#include "xsql/heads.hpp"
#include "xsql/objective.hpp"
#include "xsql/schema.hpp"
#include "xsql/schema_encoder.hpp"
#include "xsql/sequence.hpp"

namespace xsql {

struct ModelConfig {
  EncoderConfig encoder;
  int m = 0;  // schema-encoder/pointer width; 0 means "use encoder.d"

  int pooled_width() const { return m > 0 ? m : encoder.d; }
};

/// The full parser: parameter store plus every sub-module's parameter
/// handles, registered in one deterministic order.
struct XSqlModel {
  ModelConfig config;
  ParameterStore store;
  EncoderParams encoder;
  SchemaEncoderParams schema_encoder;
  HeadParams heads;

  XSqlModel(const ModelConfig& cfg, std::uint64_t init_seed);

  XSqlModel(const XSqlModel&) = delete;
  XSqlModel& operator=(const XSqlModel&) = delete;
};

/// Builds the teacher-forced loss for one example. Dropout is active only
/// when `train` is set.
NodeId training_loss(Graph& g, XSqlModel& model, const InputSequence& seq,
                     const Schema& schema, const GoldLabel& gold, bool train,
                     Rng* dropout_rng, LossParts* parts = nullptr);

/// Plain per-example head probabilities, every head materialized as values
/// (softmaxed), with per-column operator and span distributions for all user
/// columns. S-AGG is conditioned on the argmax select column.
struct HeadDistributions {
  std::vector<Real> s_col;                   // [C]
  std::vector<Real> s_agg;                   // [6]
  std::vector<Real> w_num;                   // [4]
  std::vector<Real> w_col;                   // [C+1], empty last
  std::vector<std::vector<Real>> w_op;       // per user column, [3]
  std::vector<std::vector<Real>> val_start;  // per user column, [n]
  std::vector<std::vector<Real>> val_end;    // per user column, [n]
};

HeadDistributions inference_forward(Graph& g, XSqlModel& model, const InputSequence& seq,
                                    const Schema& schema);

}  // namespace xsql
