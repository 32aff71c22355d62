#pragma once

#include <optional>
#include <string>
#include <vector>

namespace xsql {

/// Lowercase, trim, and collapse internal whitespace runs to single spaces.
std::string normalize_text(const std::string& s);

/// Whitespace tokenization of the normalized form of s.
std::vector<std::string> tokenize(const std::string& s);

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end);

/// Parse integers, decimals, and comma-grouped digits ("1,234"). Returns
/// nothing when the text is not a number.
std::optional<double> parse_number(const std::string& s);

}  // namespace xsql
