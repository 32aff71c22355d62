#pragma once

#include <string>

#include "xsql/data.hpp"
#include "xsql/executor.hpp"
#include "xsql/schema.hpp"

namespace xsql {

/// Overall and per-sub-task accuracies over one dataset. Sub-task semantics:
/// s_col/s_agg compare the single choice; w_num compares clause counts;
/// w_col the where-column set; w_op the (column, operator) set; w_val the
/// (column, normalized value) set.
struct MetricsReport {
  double acc_lf = 0.0;
  double acc_ex = 0.0;
  double s_col = 0.0;
  double s_agg = 0.0;
  double w_num = 0.0;
  double w_col = 0.0;
  double w_op = 0.0;
  double w_val = 0.0;
  int n_examples = 0;
  DatasetCounters counters;

  /// Scores one (prediction, gold) pair into the running tallies.
  void accumulate(const Table& table, const SqlQuery& pred, const SqlQuery& gold);
  /// Converts tallies to ratios. No-op on an empty report.
  void finalize();

  /// {"acc_lf": ..., "acc_ex": ..., ..., "counts": {...}} — stable across
  /// runs for identical inputs.
  std::string to_json() const;
  /// Aligned human-readable table.
  std::string to_text() const;
};

/// Per-example sub-task hits, exposed for the accuracy-implication checks.
struct SubtaskHits {
  bool lf = false;
  bool ex = false;
  bool s_col = false;
  bool s_agg = false;
  bool w_num = false;
  bool w_col = false;
  bool w_op = false;
  bool w_val = false;
};

SubtaskHits score_example(const Table& table, const SqlQuery& pred, const SqlQuery& gold);

}  // namespace xsql
