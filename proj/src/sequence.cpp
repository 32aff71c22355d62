#include "xsql/sequence.hpp"

#include <stdexcept>

namespace xsql {

namespace {

int type_of(ColumnType ctype) {
  switch (ctype) {
    case ColumnType::CATEGORICAL:
      return static_cast<int>(TypeId::CATEGORICAL);
    case ColumnType::NUMERICAL:
      return static_cast<int>(TypeId::NUMERICAL);
    case ColumnType::EMPTY:
      return static_cast<int>(TypeId::EMPTY);
  }
  throw std::logic_error("unreachable column type");
}

}  // namespace

InputSequence serialize_example(const std::vector<std::string>& question_tokens,
                                const Schema& schema, const Vocab& vocab, int max_seq_len) {
  if (question_tokens.empty()) {
    throw std::invalid_argument("serialize: question has no tokens");
  }
  if (schema.columns.empty()) {
    throw std::invalid_argument("serialize: schema has no columns");
  }
  for (const SchemaColumn& col : schema.columns) {
    if (col.name_tokens.empty()) {
      throw std::invalid_argument("serialize: column with empty name");
    }
    if (col.ctype == ColumnType::EMPTY) {
      throw std::invalid_argument("serialize: user schema may not contain an EMPTY column");
    }
  }

  int total = 1 + static_cast<int>(question_tokens.size()) + 1;  // [CTX] q [SEP]
  for (const SchemaColumn& col : schema.columns) {
    total += static_cast<int>(col.name_tokens.size()) + 1;  // name tokens + [SEP]
  }
  total += 2;  // [EMPTY] [SEP]
  if (total > max_seq_len) {
    throw std::invalid_argument("serialize: sequence length " + std::to_string(total) +
                                " exceeds max_seq_len " + std::to_string(max_seq_len));
  }

  InputSequence seq;
  seq.token_ids.reserve(static_cast<std::size_t>(total));
  seq.type_ids.reserve(static_cast<std::size_t>(total));

  auto push = [&seq](int token_id, int type_id) {
    seq.token_ids.push_back(token_id);
    seq.type_ids.push_back(type_id);
  };

  const int q_type = static_cast<int>(TypeId::QUESTION);
  seq.ctx_index = 0;
  push(Vocab::kCtx, q_type);
  seq.question.begin = seq.length();
  for (const std::string& tok : question_tokens) push(vocab.id(tok), q_type);
  seq.question.end = seq.length();
  push(Vocab::kSep, q_type);

  for (const SchemaColumn& col : schema.columns) {
    int t = type_of(col.ctype);
    Span span;
    span.begin = seq.length();
    for (const std::string& tok : col.name_tokens) push(vocab.id(tok), t);
    span.end = seq.length();
    seq.columns.push_back(span);
    push(Vocab::kSep, t);
  }

  const int e_type = static_cast<int>(TypeId::EMPTY);
  seq.columns.push_back(Span{seq.length(), seq.length() + 1});
  push(Vocab::kEmpty, e_type);
  push(Vocab::kSep, e_type);

  seq.position_ids.resize(seq.token_ids.size());
  for (std::size_t i = 0; i < seq.position_ids.size(); ++i) {
    seq.position_ids[i] = static_cast<int>(i);
  }
  return seq;
}

}  // namespace xsql
