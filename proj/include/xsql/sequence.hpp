#pragma once

#include <string>
#include <vector>

#include "xsql/schema.hpp"
#include "xsql/vocab.hpp"

namespace xsql {

/// Per-position segment type replacing BERT segment embeddings.
enum class TypeId : int { QUESTION = 0, CATEGORICAL = 1, NUMERICAL = 2, EMPTY = 3 };

constexpr int kNumTypeIds = 4;

/// Half-open token-index range [begin, end).
struct Span {
  int begin = 0;
  int end = 0;

  int length() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Serialized (question, schema) pair:
///   [CTX] q1 ... qn [SEP] col1-tokens [SEP] ... [EMPTY] [SEP]
/// with per-position type ids. `columns` holds the name-token span of every
/// user column plus, last, the 1-token span of the special empty column.
struct InputSequence {
  std::vector<int> token_ids;
  std::vector<int> type_ids;
  std::vector<int> position_ids;
  int ctx_index = 0;
  Span question;
  std::vector<Span> columns;

  int length() const { return static_cast<int>(token_ids.size()); }
};

/// Applies the layout rule above. Throws std::invalid_argument on an empty
/// question and a too-long error naming both lengths on overflow.
InputSequence serialize_example(const std::vector<std::string>& question_tokens,
                                const Schema& schema, const Vocab& vocab, int max_seq_len);

}  // namespace xsql
