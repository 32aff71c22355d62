#pragma once

#include <array>
#include <string>
#include <vector>

namespace xsql {

/// Column kind. EMPTY is reserved for the special column appended at
/// serialization time; user schemas never contain it.
enum class ColumnType { CATEGORICAL, NUMERICAL, EMPTY };

constexpr int kNumAggregators = 6;  // NONE, MAX, MIN, COUNT, SUM, AVG
constexpr int kNumOperators = 3;    // =, >, <
constexpr int kMaxConds = 4;

constexpr std::array<const char*, kNumAggregators> kAggregatorNames = {
    "NONE", "MAX", "MIN", "COUNT", "SUM", "AVG"};
constexpr std::array<const char*, kNumOperators> kOperatorNames = {"=", ">", "<"};

constexpr int kAggNone = 0;
constexpr int kAggMax = 1;
constexpr int kAggMin = 2;
constexpr int kAggCount = 3;
constexpr int kAggSum = 4;
constexpr int kAggAvg = 5;

constexpr int kOpEq = 0;
constexpr int kOpGt = 1;
constexpr int kOpLt = 2;

/// One table column: tokenized name plus type.
struct SchemaColumn {
  std::vector<std::string> name_tokens;
  ColumnType ctype = ColumnType::CATEGORICAL;
};

/// Ordered, typed column list of one table. Excludes the special empty
/// column, which serialization appends.
struct Schema {
  std::vector<SchemaColumn> columns;

  int num_columns() const { return static_cast<int>(columns.size()); }
};

/// One where clause of a query AST: (column, operator, value string).
struct Condition {
  int col = 0;
  int op = 0;
  std::string value;

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// SQL sketch AST: SELECT agg(col) FROM t WHERE cond AND ...
struct SqlQuery {
  int select_col = 0;
  int agg = 0;
  std::vector<Condition> conds;

  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

/// Gold supervision for one condition: the value both as a question-token
/// span (for W-VAL training) and as the original string (for matching).
struct GoldCond {
  int col = 0;
  int op = 0;
  int span_start = 0;  // inclusive question-token indices
  int span_end = 0;
  std::string value;
};

/// Full gold supervision for one example.
struct GoldLabel {
  int select_col = 0;
  int agg = 0;
  std::vector<GoldCond> conds;

  int n_conds() const { return static_cast<int>(conds.size()); }
};

/// The gold label viewed as a query AST (spans dropped, values kept).
SqlQuery gold_to_query(const GoldLabel& gold);

/// Validates a gold label against a schema and question length; throws
/// std::invalid_argument describing the first violation.
void validate_gold(const GoldLabel& gold, int num_user_columns, int question_len);

}  // namespace xsql
