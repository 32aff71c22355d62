#include "xsql/text.hpp"

#include <cctype>
#include <cstdlib>

namespace xsql {

std::string normalize_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      in_space = !out.empty();
      continue;
    }
    if (in_space) {
      out.push_back(' ');
      in_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::string norm = normalize_text(s);
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t sp = norm.find(' ', start);
    if (sp == std::string::npos) sp = norm.size();
    if (sp > start) tokens.push_back(norm.substr(start, sp - start));
    start = sp + 1;
  }
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  std::string trimmed;
  // trim outer whitespace, drop grouping commas between digits
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  for (std::size_t i = lo; i < hi; ++i) {
    if (s[i] == ',' && i > lo && i + 1 < hi && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
        std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
      continue;
    }
    trimmed.push_back(s[i]);
  }
  if (trimmed.empty()) return std::nullopt;
  const char* begin = trimmed.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end != begin + trimmed.size()) return std::nullopt;
  return value;
}

}  // namespace xsql
