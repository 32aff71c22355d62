#pragma once

#include <vector>

#include "xsql/graph.hpp"
#include "xsql/schema.hpp"

namespace xsql {

/// Target distribution for the where-column task over user columns plus the
/// empty column (last slot): mass 1 on the empty slot when there are no
/// conditions, otherwise 1/n on each condition column.
Tensor build_wcol_target(const std::vector<GoldCond>& conds, int num_user_columns);

/// Per-sub-task losses of one example and their sum. `w_num` is present only
/// when the example has at least one condition.
struct LossParts {
  Real s_col = 0.0;
  Real s_agg = 0.0;
  Real w_num = 0.0;
  bool has_w_num = false;
  Real w_col = 0.0;
  Real w_op = 0.0;
  Real w_val = 0.0;
  Real total = 0.0;
};

/// Teacher-forced head logits for one example: S-AGG computed on the gold
/// select column; per-condition logits in gold condition order.
struct HeadLossInputs {
  NodeId s_col_logits = -1;
  NodeId s_agg_logits = -1;
  NodeId w_num_logits = -1;
  NodeId w_col_logits = -1;
  std::vector<NodeId> w_op_logits;
  std::vector<NodeId> start_logits;
  std::vector<NodeId> end_logits;
};

/// Builds the composite loss node: cross entropy on S-COL, S-AGG, W-NUM (only
/// when n >= 1), W-OP, and the two W-VAL pointers, summed over conditions,
/// plus KL(Q || P) for W-COL. Returns the scalar total node and fills
/// `parts` (when non-null) with the evaluated breakdown.
NodeId total_loss(Graph& g, const HeadLossInputs& heads, const GoldLabel& gold,
                  int num_user_columns, LossParts* parts = nullptr);

}  // namespace xsql
