#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xsql/executor.hpp"
#include "xsql/model.hpp"
#include "xsql/schema.hpp"

namespace xsql {

/// Chosen labels with their probabilities, for diagnostics and EG reranking.
struct DecodeTrace {
  Real p_select = 0.0;
  Real p_agg = 0.0;
  Real p_num = 0.0;
  Real p_empty = 0.0;  // probability mass on the empty column
  std::vector<Real> p_cond_col;
  std::vector<Real> p_cond_op;
  std::vector<Real> p_cond_span;
  bool truncated_conds = false;  // schema had fewer columns than predicted n
  bool eg_replaced = false;      // EG returned a non-top candidate
};

/// Highest-probability (start, end) pair with start <= end; ties prefer the
/// smaller start, then the smaller end. Inputs are distributions over the
/// same question length.
std::pair<int, int> decode_span(const std::vector<Real>& start_dist,
                                const std::vector<Real>& end_dist);

/// Greedy sketch decoding per the inference rule: if the empty column wins
/// W-COL the where clause is empty and W-NUM is ignored; otherwise the top
/// argmax(w_num)+1 non-empty columns become conditions with their argmax
/// operator and best span.
SqlQuery decode(const HeadDistributions& heads, const std::vector<std::string>& question_tokens,
                const Schema& schema, DecodeTrace* trace = nullptr);

/// Execution-guided decoding: ranks up to beam_k where-clause variants by
/// joint probability (the plain decode first) and returns the first that
/// executes without error and yields a nonempty result; falls back to the
/// plain decode.
SqlQuery decode_with_eg(const HeadDistributions& heads,
                        const std::vector<std::string>& question_tokens, const Schema& schema,
                        const Table& table, int beam_k, DecodeTrace* trace = nullptr);

}  // namespace xsql
