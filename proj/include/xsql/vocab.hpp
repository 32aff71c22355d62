#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace xsql {

/// Closed whitespace-token vocabulary with five reserved entries. Ids are
/// deterministic: reserved tokens first, then corpus tokens in sorted order.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kCtx = 1;
  static constexpr int kSep = 2;
  static constexpr int kEmpty = 3;
  static constexpr int kUnk = 4;

  /// Builds a vocabulary over every token in the corpus.
  static Vocab build(const std::vector<std::vector<std::string>>& corpus);

  /// One token per line; line number = id.
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;

  /// Constructs directly from an id-ordered token list (checkpoint loading).
  static Vocab from_tokens(std::vector<std::string> tokens);

  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  Vocab() = default;
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace xsql
