#include "xsql/decoding.hpp"

#include <algorithm>
#include <stdexcept>

#include "xsql/text.hpp"

namespace xsql {

namespace {

int argmax(const std::vector<Real>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct SpanChoice {
  int start = 0;
  int end = 0;
  Real p = 0.0;
};

// Best and second-best (start <= end) pairs by joint probability, ties by
// smaller start then smaller end.
std::vector<SpanChoice> top2_spans(const std::vector<Real>& start_dist,
                                   const std::vector<Real>& end_dist) {
  int len = static_cast<int>(start_dist.size());
  std::vector<SpanChoice> best;
  auto consider = [&best](SpanChoice c) {
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (c.p > best[i].p) {
        best.insert(best.begin() + static_cast<std::ptrdiff_t>(i), c);
        if (best.size() > 2) best.pop_back();
        return;
      }
    }
    if (best.size() < 2) best.push_back(c);
  };
  for (int s = 0; s < len; ++s) {
    for (int e = s; e < len; ++e) {
      consider(SpanChoice{s, e, start_dist[static_cast<std::size_t>(s)] *
                                    end_dist[static_cast<std::size_t>(e)]});
    }
  }
  return best;
}

// Per-user-column greedy choices under the head distributions.
struct ColChoice {
  Real p_col = 0.0;
  int op = 0;
  Real p_op = 0.0;
  SpanChoice span;
  SpanChoice span2;  // second-best; p == -1 when absent
};

std::vector<ColChoice> column_choices(const HeadDistributions& heads) {
  std::vector<ColChoice> choices;
  int num_cols = static_cast<int>(heads.w_op.size());
  choices.reserve(static_cast<std::size_t>(num_cols));
  for (int c = 0; c < num_cols; ++c) {
    ColChoice ch;
    ch.p_col = heads.w_col[static_cast<std::size_t>(c)];
    ch.op = argmax(heads.w_op[static_cast<std::size_t>(c)]);
    ch.p_op = heads.w_op[static_cast<std::size_t>(c)][static_cast<std::size_t>(ch.op)];
    auto spans = top2_spans(heads.val_start[static_cast<std::size_t>(c)],
                            heads.val_end[static_cast<std::size_t>(c)]);
    ch.span = spans.at(0);
    ch.span2 = spans.size() > 1 ? spans[1] : SpanChoice{0, 0, -1.0};
    choices.push_back(ch);
  }
  return choices;
}

std::string span_value(const std::vector<std::string>& question_tokens, const SpanChoice& span) {
  return join_tokens(question_tokens, static_cast<std::size_t>(span.start),
                     static_cast<std::size_t>(span.end) + 1);
}

}  // namespace

std::pair<int, int> decode_span(const std::vector<Real>& start_dist,
                                const std::vector<Real>& end_dist) {
  if (start_dist.empty() || start_dist.size() != end_dist.size()) {
    throw std::invalid_argument("decode_span: distributions must be nonempty and equal length");
  }
  SpanChoice best = top2_spans(start_dist, end_dist).at(0);
  return {best.start, best.end};
}

SqlQuery decode(const HeadDistributions& heads, const std::vector<std::string>& question_tokens,
                const Schema& schema, DecodeTrace* trace) {
  int num_cols = schema.num_columns();
  if (static_cast<int>(heads.s_col.size()) != num_cols ||
      static_cast<int>(heads.w_col.size()) != num_cols + 1 ||
      heads.w_op.size() != heads.s_col.size() || heads.val_start.size() != heads.w_op.size()) {
    throw std::invalid_argument("decode: head output shapes disagree with the schema");
  }

  DecodeTrace tr;
  SqlQuery q;
  q.select_col = argmax(heads.s_col);
  tr.p_select = heads.s_col[static_cast<std::size_t>(q.select_col)];
  q.agg = argmax(heads.s_agg);
  tr.p_agg = heads.s_agg[static_cast<std::size_t>(q.agg)];
  tr.p_num = *std::max_element(heads.w_num.begin(), heads.w_num.end());
  tr.p_empty = heads.w_col.back();

  int empty_index = num_cols;
  if (argmax(heads.w_col) != empty_index) {
    int n = argmax(heads.w_num) + 1;
    std::vector<int> order(static_cast<std::size_t>(num_cols));
    for (int i = 0; i < num_cols; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&heads](int a, int b) {
      return heads.w_col[static_cast<std::size_t>(a)] > heads.w_col[static_cast<std::size_t>(b)];
    });
    if (n > num_cols) {
      n = num_cols;
      tr.truncated_conds = true;
    }
    std::vector<ColChoice> choices = column_choices(heads);
    for (int rank = 0; rank < n; ++rank) {
      int col = order[static_cast<std::size_t>(rank)];
      const ColChoice& ch = choices[static_cast<std::size_t>(col)];
      q.conds.push_back(Condition{col, ch.op, span_value(question_tokens, ch.span)});
      tr.p_cond_col.push_back(ch.p_col);
      tr.p_cond_op.push_back(ch.p_op);
      tr.p_cond_span.push_back(ch.span.p);
    }
  }
  if (trace != nullptr) *trace = tr;
  return q;
}

namespace {

// A candidate where clause: (col, op, span) triples plus its joint score
// under the head distributions.
struct Candidate {
  std::vector<std::tuple<int, int, SpanChoice>> conds;
  Real score = 0.0;
};

Real candidate_score(const HeadDistributions& heads, const Candidate& cand) {
  if (cand.conds.empty()) return heads.w_col.back();
  Real score = heads.w_num[cand.conds.size() - 1];
  for (const auto& [col, op, span] : cand.conds) {
    score *= heads.w_col[static_cast<std::size_t>(col)] *
             heads.w_op[static_cast<std::size_t>(col)][static_cast<std::size_t>(op)] * span.p;
  }
  return score;
}

SqlQuery candidate_query(const Candidate& cand, const SqlQuery& plain,
                         const std::vector<std::string>& question_tokens) {
  SqlQuery q;
  q.select_col = plain.select_col;
  q.agg = plain.agg;
  for (const auto& [col, op, span] : cand.conds) {
    q.conds.push_back(Condition{col, op, span_value(question_tokens, span)});
  }
  return q;
}

bool same_cond_set(const SqlQuery& a, const SqlQuery& b) {
  return lf_match(a, b);
}

// Nonempty execution: no error, and the result holds at least one row.
bool qualifies(const Table& table, const SqlQuery& q) {
  ExecResult r = execute(table, q);
  if (r.error) return false;
  if (r.is_scalar) return q.agg != kAggCount || r.scalar > 0.0;
  return !r.list.empty();
}

}  // namespace

SqlQuery decode_with_eg(const HeadDistributions& heads,
                        const std::vector<std::string>& question_tokens, const Schema& schema,
                        const Table& table, int beam_k, DecodeTrace* trace) {
  if (beam_k < 1) throw std::invalid_argument("decode_with_eg: beam_k must be >= 1");
  DecodeTrace tr;
  SqlQuery plain = decode(heads, question_tokens, schema, &tr);
  if (qualifies(table, plain)) {
    if (trace != nullptr) *trace = tr;
    return plain;
  }

  int num_cols = schema.num_columns();
  std::vector<ColChoice> choices = column_choices(heads);

  std::vector<Candidate> pool;
  pool.push_back(Candidate{});  // the empty where clause

  // Every column subset of size 1..4 with per-column greedy op/span.
  int max_n = std::min(kMaxConds, num_cols);
  std::vector<int> subset;
  auto add_subset = [&pool, &choices](const std::vector<int>& cols) {
    Candidate cand;
    for (int col : cols) {
      const ColChoice& ch = choices[static_cast<std::size_t>(col)];
      cand.conds.emplace_back(col, ch.op, ch.span);
    }
    pool.push_back(std::move(cand));
  };
  auto enumerate = [&](auto&& self, int next, int remaining) -> void {
    if (remaining == 0) {
      add_subset(subset);
      return;
    }
    for (int col = next; col <= num_cols - remaining; ++col) {
      subset.push_back(col);
      self(self, col + 1, remaining - 1);
      subset.pop_back();
    }
  };
  for (int n = 1; n <= max_n; ++n) enumerate(enumerate, 0, n);

  // Single-decision deviations of the plain where clause: one operator or
  // one span swapped.
  std::vector<std::tuple<int, int, SpanChoice>> plain_conds;
  {
    // Rebuild the plain candidate's structured conds from the greedy choices.
    for (const Condition& c : plain.conds) {
      const ColChoice& ch = choices[static_cast<std::size_t>(c.col)];
      plain_conds.emplace_back(c.col, ch.op, ch.span);
    }
  }
  for (std::size_t i = 0; i < plain_conds.size(); ++i) {
    for (int op = 0; op < kNumOperators; ++op) {
      if (op == std::get<1>(plain_conds[i])) continue;
      Candidate cand{plain_conds, 0.0};
      std::get<1>(cand.conds[i]) = op;
      pool.push_back(std::move(cand));
    }
    int col = std::get<0>(plain_conds[i]);
    const ColChoice& ch = choices[static_cast<std::size_t>(col)];
    if (ch.span2.p >= 0.0) {
      Candidate cand{plain_conds, 0.0};
      std::get<2>(cand.conds[i]) = ch.span2;
      pool.push_back(std::move(cand));
    }
  }

  for (Candidate& cand : pool) cand.score = candidate_score(heads, cand);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  Real plain_score = candidate_score(
      heads, Candidate{plain_conds, 0.0});
  if (plain.conds.empty()) plain_score = heads.w_col.back();

  int examined = 1;  // the plain decode was candidate #1
  for (const Candidate& cand : pool) {
    if (examined >= beam_k) break;
    if (cand.score >= plain_score) {
      // Same or higher mass: either it is the plain decode again (skip) or a
      // tie that would break the "EG never outranks the model" rule.
      continue;
    }
    SqlQuery q = candidate_query(cand, plain, question_tokens);
    if (same_cond_set(q, plain)) continue;
    ++examined;
    if (qualifies(table, q)) {
      tr.eg_replaced = true;
      if (trace != nullptr) *trace = tr;
      return q;
    }
  }
  if (trace != nullptr) *trace = tr;
  return plain;
}

}  // namespace xsql
