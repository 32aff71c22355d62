#pragma once

#include <utility>
#include <vector>

#include "xsql/graph.hpp"
#include "xsql/schema.hpp"
#include "xsql/schema_encoder.hpp"

namespace xsql {

/// The six prediction sub-tasks. W-VAL's start and end pointers count as
/// separate modulation tasks, each owning its own context-combination
/// parameters.
enum class TaskId { S_COL, S_AGG, W_NUM, W_COL, W_OP, W_VAL_START, W_VAL_END };

/// Per-task modulation parameters: r = LayerNorm(U' h_ctx + V' h_ci).
struct ModulationParams {
  Parameter* u;        // [d x d]
  Parameter* v;        // [d x d]
  Parameter* ln_gain;  // [d]
  Parameter* ln_bias;  // [d]
};

struct HeadParams {
  // Modulation sub-networks, one per task that owns one.
  ModulationParams mod_s_col;
  ModulationParams mod_w_col;
  ModulationParams mod_w_op;
  ModulationParams mod_val_start;
  ModulationParams mod_val_end;

  // S-AGG combines context, the raw pooled column vector, and a column-type
  // embedding inside its own layer norm.
  Parameter* agg_u;        // [d x d]
  Parameter* agg_v;        // [d x d]
  Parameter* type_emb;     // [3 x d]: categorical, numerical, empty
  Parameter* agg_ln_gain;  // [d]
  Parameter* agg_ln_bias;  // [d]

  // Output projections.
  Parameter* w_s_col;  // [1 x d]
  Parameter* w_s_agg;  // [6 x d]
  Parameter* w_w_num;  // [4 x d]
  Parameter* w_w_col;  // [1 x d]
  Parameter* w_w_op;   // [3 x d]

  // Span pointers: p(q_j | C_i) = softmax_j g(U h_qj + V r_ci) with the
  // pointer scorer g(x) = W tanh(x) + b and disjoint parameters for start
  // and end. The nonlinearity keeps the distribution column-conditioned (an
  // affine g's column term would cancel in the softmax).
  Parameter* val_start_u;  // [m x d]
  Parameter* val_start_v;  // [m x d]
  Parameter* g_start_w;    // [1 x m]
  Parameter* g_start_b;    // [1]
  Parameter* val_end_u;    // [m x d]
  Parameter* val_end_v;    // [m x d]
  Parameter* g_end_w;      // [1 x m]
  Parameter* g_end_b;      // [1]

  int d = 0;
  int m = 0;
};

HeadParams init_heads(ParameterStore& store, int d, int m, Rng& rng);

/// Eq.-2 style modulation for the given task. The task must own a modulation
/// sub-network (every task except S_AGG and W_NUM).
NodeId modulate(Graph& g, TaskId task, NodeId h_ctx, NodeId h_ci, const HeadParams& params);

/// Logits over user columns (the empty column is excluded: SELECT always
/// names a real column). [1 x C]
NodeId s_col_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, const HeadParams& params);

/// Logits over the 6 aggregators for column `col`, using the raw pooled
/// column vector plus a type embedding. EMPTY ctype is an error.
NodeId s_agg_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, int col,
                    ColumnType ctype, const HeadParams& params);

/// Logits over {1, 2, 3, 4} where clauses, from the context alone. [1 x 4]
NodeId w_num_logits(Graph& g, NodeId h_ctx, const HeadParams& params);

/// Logits over all columns including the empty column. [1 x (C+1)]
NodeId w_col_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, const HeadParams& params);

/// Logits over the 3 operators for user column `col`; the empty column is an
/// error. [1 x 3]
NodeId w_op_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, int col,
                   const HeadParams& params);

/// (start, end) span-pointer logits over question tokens for user column
/// `col`. Empty questions and the empty column are errors. Each [1 x n].
std::pair<NodeId, NodeId> w_val_logits(Graph& g, NodeId h_q, NodeId h_ctx,
                                       const ColumnVectors& cols, int col,
                                       const HeadParams& params);

}  // namespace xsql
