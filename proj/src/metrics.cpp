#include "xsql/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "xsql/text.hpp"

namespace xsql {

namespace {

std::vector<int> col_set(const SqlQuery& q) {
  std::vector<int> cols;
  for (const Condition& c : q.conds) cols.push_back(c.col);
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::vector<std::pair<int, int>> col_op_set(const SqlQuery& q) {
  std::vector<std::pair<int, int>> set;
  for (const Condition& c : q.conds) set.emplace_back(c.col, c.op);
  std::sort(set.begin(), set.end());
  return set;
}

std::vector<std::pair<int, std::string>> col_val_set(const SqlQuery& q) {
  std::vector<std::pair<int, std::string>> set;
  for (const Condition& c : q.conds) set.emplace_back(c.col, normalize_text(c.value));
  std::sort(set.begin(), set.end());
  return set;
}

}  // namespace

SubtaskHits score_example(const Table& table, const SqlQuery& pred, const SqlQuery& gold) {
  SubtaskHits h;
  h.lf = lf_match(pred, gold);
  h.ex = ex_match(table, pred, gold);
  h.s_col = pred.select_col == gold.select_col;
  h.s_agg = pred.agg == gold.agg;
  h.w_num = pred.conds.size() == gold.conds.size();
  h.w_col = col_set(pred) == col_set(gold);
  h.w_op = col_op_set(pred) == col_op_set(gold);
  h.w_val = col_val_set(pred) == col_val_set(gold);
  return h;
}

void MetricsReport::accumulate(const Table& table, const SqlQuery& pred, const SqlQuery& gold) {
  SubtaskHits h = score_example(table, pred, gold);
  acc_lf += h.lf ? 1.0 : 0.0;
  acc_ex += h.ex ? 1.0 : 0.0;
  s_col += h.s_col ? 1.0 : 0.0;
  s_agg += h.s_agg ? 1.0 : 0.0;
  w_num += h.w_num ? 1.0 : 0.0;
  w_col += h.w_col ? 1.0 : 0.0;
  w_op += h.w_op ? 1.0 : 0.0;
  w_val += h.w_val ? 1.0 : 0.0;
  ++n_examples;
}

void MetricsReport::finalize() {
  if (n_examples == 0) return;
  double n = static_cast<double>(n_examples);
  acc_lf /= n;
  acc_ex /= n;
  s_col /= n;
  s_agg /= n;
  w_num /= n;
  w_col /= n;
  w_op /= n;
  w_val /= n;
}

std::string MetricsReport::to_json() const {
  nlohmann::json counts;
  counts["examples"] = n_examples;
  counts["loaded"] = counters.loaded;
  counts["dropped_unalignable"] = counters.dropped_unalignable;
  counts["dropped_too_long"] = counters.dropped_too_long;
  counts["dropped_invalid"] = counters.dropped_invalid;

  nlohmann::json j;
  j["acc_lf"] = acc_lf;
  j["acc_ex"] = acc_ex;
  j["s_col"] = s_col;
  j["s_agg"] = s_agg;
  j["w_num"] = w_num;
  j["w_col"] = w_col;
  j["w_op"] = w_op;
  j["w_val"] = w_val;
  j["counts"] = counts;
  return j.dump(2);
}

std::string MetricsReport::to_text() const {
  std::ostringstream out;
  out << "examples " << n_examples << "\n";
  auto row = [&out](const char* name, double v) { out << name << " " << v << "\n"; };
  row("acc_lf", acc_lf);
  row("acc_ex", acc_ex);
  row("s_col", s_col);
  row("s_agg", s_agg);
  row("w_num", w_num);
  row("w_col", w_col);
  row("w_op", w_op);
  row("w_val", w_val);
  return out.str();
}

}  // namespace xsql
