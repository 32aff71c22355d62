#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xsql/executor.hpp"
#include "xsql/schema.hpp"

namespace xsql {

/// One example straight out of the examples file.
struct RawExample {
  std::string question;
  std::string table_id;
  SqlQuery sql;  // conds carry the raw value strings
};

/// One loadable training/evaluation example after tokenization, table join,
/// and span alignment.
struct ProcessedExample {
  std::vector<std::string> question_tokens;
  std::string table_id;
  Schema schema;
  GoldLabel gold;
};

struct DatasetCounters {
  int loaded = 0;
  int dropped_unalignable = 0;
  int dropped_too_long = 0;
  int dropped_invalid = 0;
};

struct Dataset {
  std::vector<ProcessedExample> examples;
  std::map<std::string, Table> tables;
  DatasetCounters counters;

  const Table& table_of(const ProcessedExample& ex) const { return tables.at(ex.table_id); }
};

/// First occurrence of the value's token subsequence in the question, after
/// normalization; inclusive indices. Nothing when absent.
std::optional<std::pair<int, int>> align_value_span(
    const std::vector<std::string>& question_tokens, const std::string& value);

/// Tokenized schema view of a table's header. Throws when a column name has
/// no tokens.
Schema schema_from_table(const Table& table);

/// Loads a tables JSONL file keyed by table id. Malformed records raise
/// errors naming the offending line.
std::map<std::string, Table> load_tables_file(const std::string& path);

/// Loads JSONL examples and tables, joins them, tokenizes, aligns condition
/// values, and drops (counting) examples that cannot be used. Malformed
/// records raise errors naming the line; a missing table id only skips the
/// example. When `require_spans` is false, unalignable values keep the
/// example with zeroed spans (evaluation does not need span supervision).
Dataset load_dataset(const std::string& examples_path, const std::string& tables_path,
                     int max_seq_len, bool require_spans = true);

struct GeneratorConfig {
  int n_examples = 200;
  std::uint64_t seed = 1;
};

/// Writes WikiSQL-format examples and tables files. Deterministic in the
/// seed; every generated gold query aligns to its question and executes to a
/// nonempty result.
void generate_synthetic(const GeneratorConfig& config, const std::string& examples_path,
                        const std::string& tables_path);

}  // namespace xsql
