#include "xsql/data.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "xsql/rng.hpp"
#include "xsql/text.hpp"

namespace xsql {

namespace {

using nlohmann::json;

[[noreturn]] void line_error(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::string cell_to_string(const json& cell, const std::string& path, int line) {
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_number() || cell.is_boolean()) return cell.dump();
  line_error(path, line, "cell is neither string nor number");
}

ColumnType parse_col_type(const std::string& t, const std::string& path, int line) {
  if (t == "text") return ColumnType::CATEGORICAL;
  if (t == "real") return ColumnType::NUMERICAL;
  line_error(path, line, "unknown column type '" + t + "'");
}

std::map<std::string, Table> load_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tables file " + path);
  std::map<std::string, Table> tables;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(path, line_no, std::string("bad JSON: ") + e.what());
    }
    if (!rec.contains("id") || !rec.contains("header") || !rec.contains("types") ||
        !rec.contains("rows")) {
      line_error(path, line_no, "table record missing id/header/types/rows");
    }
    Table t;
    t.id = rec["id"].get<std::string>();
    for (const auto& h : rec["header"]) t.header.push_back(cell_to_string(h, path, line_no));
    for (const auto& ty : rec["types"]) {
      t.col_types.push_back(parse_col_type(ty.get<std::string>(), path, line_no));
    }
    if (t.header.empty() || t.header.size() != t.col_types.size()) {
      line_error(path, line_no, "header and types disagree");
    }
    for (const auto& row : rec["rows"]) {
      std::vector<std::string> cells;
      for (const auto& cell : row) cells.push_back(cell_to_string(cell, path, line_no));
      if (cells.size() != t.header.size()) {
        line_error(path, line_no, "row width does not match header");
      }
      t.rows.push_back(std::move(cells));
    }
    for (std::size_t c = 0; c < t.col_types.size(); ++c) {
      if (t.col_types[c] != ColumnType::NUMERICAL) continue;
      for (const auto& row : t.rows) {
        if (!parse_number(row[c])) {
          line_error(path, line_no, "numerical column '" + t.header[c] +
                                        "' holds non-numeric cell '" + row[c] + "'");
        }
      }
    }
    if (!tables.emplace(t.id, t).second) {
      line_error(path, line_no, "duplicate table id '" + t.id + "'");
    }
  }
  return tables;
}

int serialized_length(const std::vector<std::string>& question_tokens, const Schema& schema) {
  int total = 1 + static_cast<int>(question_tokens.size()) + 1 + 2;
  for (const SchemaColumn& col : schema.columns) {
    total += static_cast<int>(col.name_tokens.size()) + 1;
  }
  return total;
}

}  // namespace

Schema schema_from_table(const Table& table) {
  Schema s;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    SchemaColumn col;
    col.name_tokens = tokenize(table.header[c]);
    if (col.name_tokens.empty()) {
      throw std::runtime_error("table '" + table.id + "' has a column with a blank name");
    }
    col.ctype = table.col_types[c];
    s.columns.push_back(std::move(col));
  }
  return s;
}

std::optional<std::pair<int, int>> align_value_span(
    const std::vector<std::string>& question_tokens, const std::string& value) {
  std::vector<std::string> value_tokens = tokenize(value);
  if (value_tokens.empty() || value_tokens.size() > question_tokens.size()) return std::nullopt;
  std::size_t limit = question_tokens.size() - value_tokens.size();
  for (std::size_t start = 0; start <= limit; ++start) {
    bool match = true;
    for (std::size_t j = 0; j < value_tokens.size(); ++j) {
      if (question_tokens[start + j] != value_tokens[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      return std::make_pair(static_cast<int>(start),
                            static_cast<int>(start + value_tokens.size() - 1));
    }
  }
  return std::nullopt;
}

std::map<std::string, Table> load_tables_file(const std::string& path) {
  return load_tables(path);
}

Dataset load_dataset(const std::string& examples_path, const std::string& tables_path,
                     int max_seq_len, bool require_spans) {
  Dataset ds;
  ds.tables = load_tables(tables_path);

  std::ifstream in(examples_path);
  if (!in) throw std::runtime_error("cannot open examples file " + examples_path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(examples_path, line_no, std::string("bad JSON: ") + e.what());
    }
    if (!rec.contains("question") || !rec.contains("table_id") || !rec.contains("sql")) {
      line_error(examples_path, line_no, "example record missing question/table_id/sql");
    }
    const json& sql = rec["sql"];
    if (!sql.contains("sel") || !sql.contains("agg") || !sql.contains("conds")) {
      line_error(examples_path, line_no, "sql record missing sel/agg/conds");
    }

    RawExample raw;
    raw.question = rec["question"].get<std::string>();
    raw.table_id = rec["table_id"].get<std::string>();
    raw.sql.select_col = sql["sel"].get<int>();
    raw.sql.agg = sql["agg"].get<int>();
    for (const auto& cond : sql["conds"]) {
      if (!cond.is_array() || cond.size() != 3) {
        line_error(examples_path, line_no, "condition is not a [col, op, value] triple");
      }
      raw.sql.conds.push_back(Condition{cond[0].get<int>(), cond[1].get<int>(),
                                        cell_to_string(cond[2], examples_path, line_no)});
    }
    if (raw.sql.agg < 0 || raw.sql.agg >= kNumAggregators) {
      line_error(examples_path, line_no, "aggregator out of range");
    }
    for (const Condition& c : raw.sql.conds) {
      if (c.op < 0 || c.op >= kNumOperators) {
        line_error(examples_path, line_no, "operator out of range");
      }
    }

    auto table_it = ds.tables.find(raw.table_id);
    if (table_it == ds.tables.end()) {
      ++ds.counters.dropped_invalid;
      continue;
    }
    const Table& table = table_it->second;

    ProcessedExample ex;
    ex.question_tokens = tokenize(raw.question);
    ex.table_id = raw.table_id;
    ex.schema = schema_from_table(table);
    ex.gold.select_col = raw.sql.select_col;
    ex.gold.agg = raw.sql.agg;

    bool invalid = ex.question_tokens.empty() || raw.sql.select_col < 0 ||
                   raw.sql.select_col >= table.width() ||
                   static_cast<int>(raw.sql.conds.size()) > kMaxConds;
    std::set<int> cond_cols;
    for (const Condition& c : raw.sql.conds) {
      if (c.col < 0 || c.col >= table.width() || !cond_cols.insert(c.col).second) {
        invalid = true;
      }
    }
    if (invalid) {
      ++ds.counters.dropped_invalid;
      continue;
    }

    bool unalignable = false;
    for (const Condition& c : raw.sql.conds) {
      GoldCond gc;
      gc.col = c.col;
      gc.op = c.op;
      gc.value = c.value;
      auto span = align_value_span(ex.question_tokens, c.value);
      if (span) {
        gc.span_start = span->first;
        gc.span_end = span->second;
      } else if (require_spans) {
        unalignable = true;
        break;
      }
      ex.gold.conds.push_back(gc);
    }
    if (unalignable) {
      ++ds.counters.dropped_unalignable;
      continue;
    }
    if (serialized_length(ex.question_tokens, ex.schema) > max_seq_len) {
      ++ds.counters.dropped_too_long;
      continue;
    }
    ds.examples.push_back(std::move(ex));
    ++ds.counters.loaded;
  }
  return ds;
}

namespace {

struct NamePool {
  std::vector<std::string> numerical = {"score",  "wins", "losses", "rank",  "year",  "points",
                                        "budget", "laps", "goals",  "round", "assists"};
  std::vector<std::string> categorical = {"team",     "coach",       "city",   "player name",
                                          "venue",    "region",      "nation", "home town",
                                          "sponsor",  "driver"};
  std::vector<std::string> cat_values = {"red fox",      "blue jay",    "green hill",
                                         "silver arrow", "golden bear", "black wolf",
                                         "white shark",  "royal eagle", "iron duke",
                                         "storm core",   "alpha",       "bravo",
                                         "delta",        "omega",       "zenith"};
};

Table make_table(Rng& rng, const NamePool& pool, int index) {
  Table t;
  t.id = "t" + std::to_string(index);
  int n_cols = rng.uniform_int(2, 5);
  int n_num = rng.uniform_int(1, n_cols - 1);  // at least one of each kind
  int n_cat = n_cols - n_num;

  std::vector<std::string> nums = pool.numerical;
  std::vector<std::string> cats = pool.categorical;
  rng.shuffle(nums);
  rng.shuffle(cats);
  std::vector<std::pair<std::string, ColumnType>> cols;
  for (int i = 0; i < n_num; ++i) cols.emplace_back(nums[static_cast<std::size_t>(i)],
                                                    ColumnType::NUMERICAL);
  for (int i = 0; i < n_cat; ++i) cols.emplace_back(cats[static_cast<std::size_t>(i)],
                                                    ColumnType::CATEGORICAL);
  rng.shuffle(cols);
  for (auto& [name, ctype] : cols) {
    t.header.push_back(name);
    t.col_types.push_back(ctype);
  }

  int n_rows = rng.uniform_int(3, 10);
  for (int r = 0; r < n_rows; ++r) {
    std::vector<std::string> row;
    for (ColumnType ctype : t.col_types) {
      if (ctype == ColumnType::NUMERICAL) {
        row.push_back(std::to_string(rng.uniform_int(2, 60)));
      } else {
        row.push_back(pool.cat_values[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(pool.cat_values.size()) - 1))]);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string agg_phrase(Rng& rng, int agg, const std::string& sel_name) {
  auto pick = [&rng](const std::vector<std::string>& options) {
    return options[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(options.size()) - 1))];
  };
  switch (agg) {
    case kAggNone:
      return pick({"what is the " + sel_name, "tell me the " + sel_name,
                   "list the " + sel_name});
    case kAggMax:
      return pick({"what is the highest " + sel_name, "what is the maximum " + sel_name});
    case kAggMin:
      return pick({"what is the lowest " + sel_name, "what is the minimum " + sel_name});
    case kAggCount:
      return pick({"how many " + sel_name + " entries are there",
                   "count the " + sel_name + " values"});
    case kAggSum:
      return pick({"what is the total " + sel_name, "what is the combined " + sel_name});
    case kAggAvg:
      return pick({"what is the average " + sel_name, "what is the mean " + sel_name});
    default:
      throw std::logic_error("unreachable aggregator");
  }
}

std::string cond_phrase(Rng& rng, const std::string& col_name, int op,
                        const std::string& value) {
  auto pick = [&rng](const std::vector<std::string>& options) {
    return options[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(options.size()) - 1))];
  };
  switch (op) {
    case kOpEq:
      return pick({col_name + " is " + value, col_name + " equals " + value});
    case kOpGt:
      return pick({col_name + " is greater than " + value, col_name + " is above " + value});
    case kOpLt:
      return pick({col_name + " is less than " + value, col_name + " is below " + value});
    default:
      throw std::logic_error("unreachable operator");
  }
}

}  // namespace

void generate_synthetic(const GeneratorConfig& config, const std::string& examples_path,
                        const std::string& tables_path) {
  if (config.n_examples < 1) {
    throw std::invalid_argument("generator: n_examples must be >= 1");
  }
  Rng rng(config.seed);
  NamePool pool;

  int n_tables = std::max(1, config.n_examples / 4);
  std::vector<Table> tables;
  tables.reserve(static_cast<std::size_t>(n_tables));
  for (int i = 0; i < n_tables; ++i) tables.push_back(make_table(rng, pool, i));

  std::ofstream tables_out(tables_path);
  if (!tables_out) throw std::runtime_error("cannot write " + tables_path);
  for (const Table& t : tables) {
    json rec;
    rec["id"] = t.id;
    rec["header"] = t.header;
    std::vector<std::string> types;
    for (ColumnType ct : t.col_types) {
      types.push_back(ct == ColumnType::NUMERICAL ? "real" : "text");
    }
    rec["types"] = types;
    rec["rows"] = t.rows;
    tables_out << rec.dump() << '\n';
  }

  std::ofstream examples_out(examples_path);
  if (!examples_out) throw std::runtime_error("cannot write " + examples_path);
  for (int i = 0; i < config.n_examples; ++i) {
    const Table& table = tables[static_cast<std::size_t>(i % n_tables)];
    int width = table.width();
    int agg = i % kNumAggregators;
    int n_conds = i % 3;

    std::vector<int> numerical_cols, all_cols;
    for (int c = 0; c < width; ++c) {
      all_cols.push_back(c);
      if (table.col_types[static_cast<std::size_t>(c)] == ColumnType::NUMERICAL) {
        numerical_cols.push_back(c);
      }
    }

    int select_col;
    if (agg == kAggNone || agg == kAggCount) {
      select_col = all_cols[static_cast<std::size_t>(rng.uniform_int(0, width - 1))];
    } else {
      select_col = numerical_cols[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(numerical_cols.size()) - 1))];
    }

    int anchor = rng.uniform_int(0, static_cast<int>(table.rows.size()) - 1);
    const std::vector<std::string>& row = table.rows[static_cast<std::size_t>(anchor)];

    std::vector<Condition> conds;
    std::set<int> used_cols;
    for (int j = 0; j < n_conds; ++j) {
      int want_op = (i + j) % kNumOperators;
      std::vector<int> candidates;
      for (int c : want_op == kOpEq ? all_cols : numerical_cols) {
        if (!used_cols.count(c)) candidates.push_back(c);
      }
      int op = want_op;
      if (candidates.empty()) {
        op = kOpEq;
        for (int c : all_cols) {
          if (!used_cols.count(c)) candidates.push_back(c);
        }
      }
      if (candidates.empty()) break;  // degenerate narrow table
      int col = candidates[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(candidates.size()) - 1))];
      used_cols.insert(col);

      const std::string& cell = row[static_cast<std::size_t>(col)];
      std::string value;
      if (op == kOpEq) {
        value = cell;
      } else {
        int delta = rng.uniform_int(1, 3);
        long base = std::stol(cell);
        value = std::to_string(op == kOpGt ? base - delta : base + delta);
      }
      conds.push_back(Condition{col, op, value});
    }

    std::string sel_name = table.header[static_cast<std::size_t>(select_col)];
    std::string question = agg_phrase(rng, agg, sel_name);
    if (!conds.empty()) {
      question += rng.uniform01() < 0.5 ? " when " : " where ";
      for (std::size_t j = 0; j < conds.size(); ++j) {
        if (j > 0) question += " and ";
        question += cond_phrase(rng, table.header[static_cast<std::size_t>(conds[j].col)],
                                conds[j].op, conds[j].value);
      }
    }

    json sql;
    sql["sel"] = select_col;
    sql["agg"] = agg;
    json jconds = json::array();
    for (const Condition& c : conds) {
      jconds.push_back(json::array({c.col, c.op, c.value}));
    }
    sql["conds"] = jconds;

    json rec;
    rec["question"] = question;
    rec["table_id"] = table.id;
    rec["sql"] = sql;
    examples_out << rec.dump() << '\n';
  }
}

}  // namespace xsql
