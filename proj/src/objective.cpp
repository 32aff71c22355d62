#include "xsql/objective.hpp"

#include <stdexcept>
#include <string>

namespace xsql {

Tensor build_wcol_target(const std::vector<GoldCond>& conds, int num_user_columns) {
  if (num_user_columns < 1) {
    throw std::invalid_argument("wcol target: need at least one user column");
  }
  Tensor q = Tensor::zeros({num_user_columns + 1});
  if (conds.empty()) {
    q.values.back() = 1.0;
    return q;
  }
  Real mass = 1.0 / static_cast<Real>(conds.size());
  for (std::size_t i = 0; i < conds.size(); ++i) {
    int col = conds[i].col;
    if (col < 0 || col >= num_user_columns) {
      throw std::invalid_argument("wcol target: condition column " + std::to_string(col) +
                                  " out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (conds[j].col == col) {
        throw std::invalid_argument("wcol target: duplicate condition column " +
                                    std::to_string(col));
      }
    }
    q.values[static_cast<std::size_t>(col)] = mass;
  }
  return q;
}

NodeId total_loss(Graph& g, const HeadLossInputs& heads, const GoldLabel& gold,
                  int num_user_columns, LossParts* parts) {
  int question_len = heads.start_logits.empty()
                         ? 0
                         : g.value(heads.start_logits.front()).cols();
  validate_gold(gold, num_user_columns,
                gold.conds.empty() ? 1 << 20 : question_len);
  int n = gold.n_conds();
  if (heads.w_op_logits.size() != gold.conds.size() ||
      heads.start_logits.size() != gold.conds.size() ||
      heads.end_logits.size() != gold.conds.size()) {
    throw std::invalid_argument("total_loss: per-condition logit count does not match gold");
  }

  LossParts out;
  std::vector<NodeId> terms;

  NodeId s_col = g.cross_entropy(heads.s_col_logits, gold.select_col);
  out.s_col = g.value(s_col).item();
  terms.push_back(s_col);

  NodeId s_agg = g.cross_entropy(heads.s_agg_logits, gold.agg);
  out.s_agg = g.value(s_agg).item();
  terms.push_back(s_agg);

  if (n >= 1) {
    NodeId w_num = g.cross_entropy(heads.w_num_logits, n - 1);
    out.w_num = g.value(w_num).item();
    out.has_w_num = true;
    terms.push_back(w_num);
  }

  Tensor target = build_wcol_target(gold.conds, num_user_columns);
  NodeId w_col = g.kl_divergence(target, g.softmax(heads.w_col_logits));
  out.w_col = g.value(w_col).item();
  terms.push_back(w_col);

  for (std::size_t i = 0; i < gold.conds.size(); ++i) {
    const GoldCond& c = gold.conds[i];
    NodeId op = g.cross_entropy(heads.w_op_logits[i], c.op);
    NodeId start = g.cross_entropy(heads.start_logits[i], c.span_start);
    NodeId end = g.cross_entropy(heads.end_logits[i], c.span_end);
    out.w_op += g.value(op).item();
    out.w_val += g.value(start).item() + g.value(end).item();
    terms.push_back(op);
    terms.push_back(start);
    terms.push_back(end);
  }

  NodeId total = g.add_scalars(terms);
  out.total = g.value(total).item();
  if (parts != nullptr) *parts = out;
  return total;
}

}  // namespace xsql
