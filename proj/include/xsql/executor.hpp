#pragma once

#include <string>
#include <vector>

#include "xsql/schema.hpp"

namespace xsql {

/// One in-memory table. Cells are kept as strings; numerical comparison
/// parses on demand.
struct Table {
  std::string id;
  std::vector<std::string> header;
  std::vector<ColumnType> col_types;  // CATEGORICAL or NUMERICAL
  std::vector<std::vector<std::string>> rows;

  int width() const { return static_cast<int>(header.size()); }
};

/// Result of executing one query: an error, a scalar (aggregated), or a list
/// of cell values (no aggregator).
struct ExecResult {
  bool error = false;
  std::string error_message;
  bool is_scalar = false;
  double scalar = 0.0;
  std::vector<std::string> list;

  static ExecResult make_error(std::string message);
  static ExecResult make_scalar(double value);
  static ExecResult make_list(std::vector<std::string> values);
};

/// Evaluates the query: AND-filter rows, project the select column, apply
/// the aggregator. Equality compares normalized strings; > and < compare
/// numerically and error when either side is unparseable. MAX/MIN/SUM/AVG
/// error on zero rows; AVG/SUM error on categorical columns.
ExecResult execute(const Table& table, const SqlQuery& q);

/// Exact match of SQL ASTs, with conditions compared as sets of
/// (column, operator, normalized value).
bool lf_match(const SqlQuery& pred, const SqlQuery& gold);

/// Executes both queries; true iff neither errs and the results match
/// (scalars within 1e-6 relative tolerance, lists as multisets of normalized
/// values).
bool ex_match(const Table& table, const SqlQuery& pred, const SqlQuery& gold);

}  // namespace xsql
