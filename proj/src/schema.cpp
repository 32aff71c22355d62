#include "xsql/schema.hpp"

#include <stdexcept>

namespace xsql {

SqlQuery gold_to_query(const GoldLabel& gold) {
  SqlQuery q;
  q.select_col = gold.select_col;
  q.agg = gold.agg;
  for (const GoldCond& c : gold.conds) {
    q.conds.push_back(Condition{c.col, c.op, c.value});
  }
  return q;
}

void validate_gold(const GoldLabel& gold, int num_user_columns, int question_len) {
  if (gold.select_col < 0 || gold.select_col >= num_user_columns) {
    throw std::invalid_argument("gold: select column " + std::to_string(gold.select_col) +
                                " out of range for " + std::to_string(num_user_columns) +
                                " columns");
  }
  if (gold.agg < 0 || gold.agg >= kNumAggregators) {
    throw std::invalid_argument("gold: aggregator " + std::to_string(gold.agg) + " out of range");
  }
  if (gold.n_conds() > kMaxConds) {
    throw std::invalid_argument("gold: " + std::to_string(gold.n_conds()) +
                                " conditions exceed the maximum of " + std::to_string(kMaxConds));
  }
  for (std::size_t i = 0; i < gold.conds.size(); ++i) {
    const GoldCond& c = gold.conds[i];
    if (c.col < 0 || c.col >= num_user_columns) {
      throw std::invalid_argument("gold: condition column " + std::to_string(c.col) +
                                  " out of range");
    }
    if (c.op < 0 || c.op >= kNumOperators) {
      throw std::invalid_argument("gold: operator " + std::to_string(c.op) + " out of range");
    }
    if (c.span_start < 0 || c.span_start > c.span_end || c.span_end >= question_len) {
      throw std::invalid_argument("gold: span [" + std::to_string(c.span_start) + ", " +
                                  std::to_string(c.span_end) +
                                  "] invalid for question length " +
                                  std::to_string(question_len));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (gold.conds[j].col == c.col) {
        throw std::invalid_argument("gold: duplicate condition column " + std::to_string(c.col));
      }
    }
  }
}

}  // namespace xsql
