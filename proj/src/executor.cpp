#include "xsql/executor.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "xsql/text.hpp"

namespace xsql {

ExecResult ExecResult::make_error(std::string message) {
  ExecResult r;
  r.error = true;
  r.error_message = std::move(message);
  return r;
}

ExecResult ExecResult::make_scalar(double value) {
  ExecResult r;
  r.is_scalar = true;
  r.scalar = value;
  return r;
}

ExecResult ExecResult::make_list(std::vector<std::string> values) {
  ExecResult r;
  r.list = std::move(values);
  return r;
}

ExecResult execute(const Table& table, const SqlQuery& q) {
  int width = table.width();
  if (q.select_col < 0 || q.select_col >= width) {
    return ExecResult::make_error("select column " + std::to_string(q.select_col) +
                                  " out of range");
  }
  if (q.agg < 0 || q.agg >= kNumAggregators) {
    return ExecResult::make_error("aggregator " + std::to_string(q.agg) + " out of range");
  }
  for (const Condition& c : q.conds) {
    if (c.col < 0 || c.col >= width) {
      return ExecResult::make_error("condition column " + std::to_string(c.col) +
                                    " out of range");
    }
    if (c.op < 0 || c.op >= kNumOperators) {
      return ExecResult::make_error("operator " + std::to_string(c.op) + " out of range");
    }
  }

  // Numeric conditions require the value and every cell of the condition
  // column to parse, independent of which rows other conditions keep.
  for (const Condition& c : q.conds) {
    if (c.op == kOpEq) continue;
    if (!parse_number(c.value)) {
      return ExecResult::make_error("condition value '" + c.value + "' is not numeric");
    }
    for (const auto& row : table.rows) {
      if (!parse_number(row[static_cast<std::size_t>(c.col)])) {
        return ExecResult::make_error("cell '" + row[static_cast<std::size_t>(c.col)] +
                                      "' is not numeric");
      }
    }
  }

  std::vector<const std::vector<std::string>*> kept;
  for (const auto& row : table.rows) {
    bool ok = true;
    for (const Condition& c : q.conds) {
      const std::string& cell = row[static_cast<std::size_t>(c.col)];
      if (c.op == kOpEq) {
        ok = normalize_text(cell) == normalize_text(c.value);
      } else {
        double lhs = *parse_number(cell);
        double rhs = *parse_number(c.value);
        ok = c.op == kOpGt ? lhs > rhs : lhs < rhs;
      }
      if (!ok) break;
    }
    if (ok) kept.push_back(&row);
  }

  if (q.agg == kAggCount) {
    return ExecResult::make_scalar(static_cast<double>(kept.size()));
  }
  if (q.agg == kAggNone) {
    std::vector<std::string> values;
    values.reserve(kept.size());
    for (const auto* row : kept) values.push_back((*row)[static_cast<std::size_t>(q.select_col)]);
    return ExecResult::make_list(std::move(values));
  }

  ColumnType sel_type = table.col_types[static_cast<std::size_t>(q.select_col)];
  if ((q.agg == kAggSum || q.agg == kAggAvg) && sel_type == ColumnType::CATEGORICAL) {
    return ExecResult::make_error(std::string(kAggregatorNames[static_cast<std::size_t>(q.agg)]) +
                                  " over a categorical column");
  }
  if (kept.empty()) {
    return ExecResult::make_error(std::string(kAggregatorNames[static_cast<std::size_t>(q.agg)]) +
                                  " over zero rows");
  }
  std::vector<double> nums;
  nums.reserve(kept.size());
  for (const auto* row : kept) {
    const std::string& cell = (*row)[static_cast<std::size_t>(q.select_col)];
    auto parsed = parse_number(cell);
    if (!parsed) {
      return ExecResult::make_error("cell '" + cell + "' is not numeric");
    }
    nums.push_back(*parsed);
  }
  switch (q.agg) {
    case kAggMax:
      return ExecResult::make_scalar(*std::max_element(nums.begin(), nums.end()));
    case kAggMin:
      return ExecResult::make_scalar(*std::min_element(nums.begin(), nums.end()));
    case kAggSum:
    case kAggAvg: {
      double total = 0.0;
      for (double v : nums) total += v;
      return ExecResult::make_scalar(q.agg == kAggSum ? total
                                                      : total / static_cast<double>(nums.size()));
    }
    default:
      return ExecResult::make_error("unreachable aggregator");
  }
}

namespace {

std::vector<std::tuple<int, int, std::string>> normalized_cond_set(const SqlQuery& q) {
  std::vector<std::tuple<int, int, std::string>> set;
  set.reserve(q.conds.size());
  for (const Condition& c : q.conds) {
    set.emplace_back(c.col, c.op, normalize_text(c.value));
  }
  std::sort(set.begin(), set.end());
  return set;
}

bool scalars_match(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

bool lf_match(const SqlQuery& pred, const SqlQuery& gold) {
  return pred.select_col == gold.select_col && pred.agg == gold.agg &&
         normalized_cond_set(pred) == normalized_cond_set(gold);
}

bool ex_match(const Table& table, const SqlQuery& pred, const SqlQuery& gold) {
  ExecResult rp = execute(table, pred);
  ExecResult rg = execute(table, gold);
  if (rp.error || rg.error) return false;
  if (rp.is_scalar != rg.is_scalar) return false;
  if (rp.is_scalar) return scalars_match(rp.scalar, rg.scalar);
  if (rp.list.size() != rg.list.size()) return false;
  std::vector<std::string> a, b;
  a.reserve(rp.list.size());
  b.reserve(rg.list.size());
  for (const auto& v : rp.list) a.push_back(normalize_text(v));
  for (const auto& v : rg.list) b.push_back(normalize_text(v));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace xsql
