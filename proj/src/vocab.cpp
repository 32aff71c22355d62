#include "xsql/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

namespace xsql {

namespace {
const std::vector<std::string> kReserved = {"[PAD]", "[CTX]", "[SEP]", "[EMPTY]", "[UNK]"};
}

void Vocab::index() {
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("vocab: duplicate token '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus) {
  std::set<std::string> seen;
  for (const auto& line : corpus) {
    for (const auto& tok : line) seen.insert(tok);
  }
  for (const auto& r : kReserved) seen.erase(r);

  Vocab v;
  v.tokens_ = kReserved;
  v.tokens_.insert(v.tokens_.end(), seen.begin(), seen.end());
  v.index();
  return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReserved.size()) {
    throw std::invalid_argument("vocab: token list is missing reserved entries");
  }
  for (std::size_t i = 0; i < kReserved.size(); ++i) {
    if (tokens[i] != kReserved[i]) {
      throw std::invalid_argument("vocab: reserved token " + std::to_string(i) + " is '" +
                                  tokens[i] + "', expected '" + kReserved[i] + "'");
    }
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.index();
  return v;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("vocab: cannot open " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vocab: cannot write " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

}  // namespace xsql
