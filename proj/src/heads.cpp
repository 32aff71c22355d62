#include "xsql/heads.hpp"

#include <stdexcept>
#include <string>

namespace xsql {

namespace {

constexpr Real kLnEps = 1e-5;
constexpr Real kInitStddev = 0.02;

ModulationParams init_modulation(ParameterStore& store, const std::string& task, int d,
                                 Rng& rng) {
  ModulationParams p;
  p.u = &store.create("heads." + task + ".mod_u", {d, d});
  p.v = &store.create("heads." + task + ".mod_v", {d, d});
  for (Real& x : p.u->value.values) x = rng.normal(0.0, kInitStddev);
  for (Real& x : p.v->value.values) x = rng.normal(0.0, kInitStddev);
  p.ln_gain = &store.create("heads." + task + ".mod_ln.gain", {d});
  for (Real& x : p.ln_gain->value.values) x = 1.0;
  p.ln_bias = &store.create("heads." + task + ".mod_ln.bias", {d});
  return p;
}

Parameter& init_weight(ParameterStore& store, const std::string& name, std::vector<int> shape,
                       Rng& rng) {
  Parameter& p = store.create(name, std::move(shape));
  for (Real& x : p.value.values) x = rng.normal(0.0, kInitStddev);
  return p;
}

void check_user_column(const ColumnVectors& cols, int col, const char* op_name) {
  if (col < 0 || col >= cols.count()) {
    throw std::out_of_range(std::string(op_name) + ": column " + std::to_string(col) +
                            " out of range for " + std::to_string(cols.count()) + " columns");
  }
  if (col == cols.empty_index()) {
    throw std::invalid_argument(std::string(op_name) +
                                ": the empty column is not a valid target");
  }
}

}  // namespace

HeadParams init_heads(ParameterStore& store, int d, int m, Rng& rng) {
  if (d <= 0 || m <= 0) throw std::invalid_argument("heads: d and m must be positive");
  HeadParams p;
  p.d = d;
  p.m = m;
  p.mod_s_col = init_modulation(store, "s_col", d, rng);
  p.mod_w_col = init_modulation(store, "w_col", d, rng);
  p.mod_w_op = init_modulation(store, "w_op", d, rng);
  p.mod_val_start = init_modulation(store, "val_start", d, rng);
  p.mod_val_end = init_modulation(store, "val_end", d, rng);

  p.agg_u = &init_weight(store, "heads.s_agg.u", {d, d}, rng);
  p.agg_v = &init_weight(store, "heads.s_agg.v", {d, d}, rng);
  p.type_emb = &init_weight(store, "heads.s_agg.type_emb", {3, d}, rng);
  p.agg_ln_gain = &store.create("heads.s_agg.ln.gain", {d});
  for (Real& x : p.agg_ln_gain->value.values) x = 1.0;
  p.agg_ln_bias = &store.create("heads.s_agg.ln.bias", {d});

  p.w_s_col = &init_weight(store, "heads.s_col.w", {1, d}, rng);
  p.w_s_agg = &init_weight(store, "heads.s_agg.w", {kNumAggregators, d}, rng);
  p.w_w_num = &init_weight(store, "heads.w_num.w", {kMaxConds, d}, rng);
  p.w_w_col = &init_weight(store, "heads.w_col.w", {1, d}, rng);
  p.w_w_op = &init_weight(store, "heads.w_op.w", {kNumOperators, d}, rng);

  p.val_start_u = &init_weight(store, "heads.val_start.u", {m, d}, rng);
  p.val_start_v = &init_weight(store, "heads.val_start.v", {m, d}, rng);
  p.g_start_w = &init_weight(store, "heads.val_start.g_w", {1, m}, rng);
  p.g_start_b = &store.create("heads.val_start.g_b", {1});
  p.val_end_u = &init_weight(store, "heads.val_end.u", {m, d}, rng);
  p.val_end_v = &init_weight(store, "heads.val_end.v", {m, d}, rng);
  p.g_end_w = &init_weight(store, "heads.val_end.g_w", {1, m}, rng);
  p.g_end_b = &store.create("heads.val_end.g_b", {1});
  return p;
}

NodeId modulate(Graph& g, TaskId task, NodeId h_ctx, NodeId h_ci, const HeadParams& params) {
  const ModulationParams* mp = nullptr;
  switch (task) {
    case TaskId::S_COL: mp = &params.mod_s_col; break;
    case TaskId::W_COL: mp = &params.mod_w_col; break;
    case TaskId::W_OP: mp = &params.mod_w_op; break;
    case TaskId::W_VAL_START: mp = &params.mod_val_start; break;
    case TaskId::W_VAL_END: mp = &params.mod_val_end; break;
    case TaskId::S_AGG:
    case TaskId::W_NUM:
      throw std::invalid_argument("modulate: task owns no modulation sub-network");
  }
  NodeId combined = g.add(g.matmul(h_ctx, g.transpose(g.param(*mp->u))),
                          g.matmul(h_ci, g.transpose(g.param(*mp->v))));
  return g.layer_norm(combined, g.param(*mp->ln_gain), g.param(*mp->ln_bias), kLnEps);
}

NodeId s_col_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols,
                    const HeadParams& params) {
  if (cols.count() < 2) {
    throw std::invalid_argument("s_col: need at least one user column");
  }
  std::vector<NodeId> logits;
  logits.reserve(static_cast<std::size_t>(cols.count() - 1));
  NodeId w_t = g.transpose(g.param(*params.w_s_col));  // [d x 1]
  for (int i = 0; i + 1 < cols.count(); ++i) {
    NodeId r = modulate(g, TaskId::S_COL, h_ctx, cols.h[static_cast<std::size_t>(i)], params);
    logits.push_back(g.matmul(r, w_t));  // [1 x 1]
  }
  return g.concat_cols(logits);  // [1 x C]
}

NodeId s_agg_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, int col,
                    ColumnType ctype, const HeadParams& params) {
  check_user_column(cols, col, "s_agg");
  if (ctype == ColumnType::EMPTY) {
    throw std::invalid_argument("s_agg: aggregator is never predicted for the empty column");
  }
  int type_row = ctype == ColumnType::CATEGORICAL ? 0 : 1;
  NodeId combined = g.add(g.matmul(h_ctx, g.transpose(g.param(*params.agg_u))),
                          g.matmul(cols.h[static_cast<std::size_t>(col)],
                                   g.transpose(g.param(*params.agg_v))));
  combined = g.add(combined, g.gather_rows(*params.type_emb, {type_row}));
  NodeId normed = g.layer_norm(combined, g.param(*params.agg_ln_gain),
                               g.param(*params.agg_ln_bias), kLnEps);
  return g.matmul(normed, g.transpose(g.param(*params.w_s_agg)));  // [1 x 6]
}

NodeId w_num_logits(Graph& g, NodeId h_ctx, const HeadParams& params) {
  return g.matmul(h_ctx, g.transpose(g.param(*params.w_w_num)));  // [1 x 4]
}

NodeId w_col_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols,
                    const HeadParams& params) {
  std::vector<NodeId> logits;
  logits.reserve(static_cast<std::size_t>(cols.count()));
  NodeId w_t = g.transpose(g.param(*params.w_w_col));  // [d x 1]
  for (int i = 0; i < cols.count(); ++i) {
    NodeId r = modulate(g, TaskId::W_COL, h_ctx, cols.h[static_cast<std::size_t>(i)], params);
    logits.push_back(g.matmul(r, w_t));
  }
  return g.concat_cols(logits);  // [1 x (C+1)]
}

NodeId w_op_logits(Graph& g, NodeId h_ctx, const ColumnVectors& cols, int col,
                   const HeadParams& params) {
  check_user_column(cols, col, "w_op");
  NodeId r = modulate(g, TaskId::W_OP, h_ctx, cols.h[static_cast<std::size_t>(col)], params);
  return g.matmul(r, g.transpose(g.param(*params.w_w_op)));  // [1 x 3]
}

std::pair<NodeId, NodeId> w_val_logits(Graph& g, NodeId h_q, NodeId h_ctx,
                                       const ColumnVectors& cols, int col,
                                       const HeadParams& params) {
  check_user_column(cols, col, "w_val");
  if (g.value(h_q).rows() < 1) {
    throw std::invalid_argument("w_val: question has no tokens");
  }
  NodeId h_ci = cols.h[static_cast<std::size_t>(col)];

  auto pointer = [&](TaskId task, Parameter& u, Parameter& v, Parameter& gw, Parameter& gb) {
    NodeId r = modulate(g, task, h_ctx, h_ci, params);
    NodeId q_proj = g.matmul(h_q, g.transpose(g.param(u)));  // [n x m]
    NodeId c_proj = g.matmul(r, g.transpose(g.param(v)));    // [1 x m]
    NodeId x = g.add_row(q_proj, c_proj);                    // [n x m]
    // The tanh is load-bearing: with a purely affine scorer the column term
    // shifts every position's logit equally and cancels in the softmax, so
    // all columns would share one span distribution.
    NodeId y = g.add_scalar(g.matmul(g.tanh(x), g.transpose(g.param(gw))), g.param(gb));
    return g.transpose(y);  // [1 x n]
  };

  NodeId start = pointer(TaskId::W_VAL_START, *params.val_start_u, *params.val_start_v,
                         *params.g_start_w, *params.g_start_b);
  NodeId end = pointer(TaskId::W_VAL_END, *params.val_end_u, *params.val_end_v,
                       *params.g_end_w, *params.g_end_b);
  return {start, end};
}

}  // namespace xsql
