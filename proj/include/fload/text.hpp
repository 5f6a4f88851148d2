#pragma once

// Small line/token helpers shared by the file-format parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fload::text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

inline bool is_reserved(char c) {
  return c == '(' || c == ')' || c == ';' || c == '{' || c == '}';
}

/// A token may be any non-empty run of characters without whitespace or
/// reserved characters.
inline bool valid_token(std::string_view tok) {
  if (tok.empty()) return false;
  for (char c : tok)
    if (is_space(c) || is_reserved(c)) return false;
  return true;
}

inline bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       c == '_';
    const bool digit = c >= '0' && c <= '9';
    if (!(alpha || (i > 0 && (digit || c == '-')))) return false;
  }
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Drops a `#` comment, if any.
inline std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

inline std::vector<std::string_view> split_lines(std::string_view doc) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= doc.size()) {
    const auto nl = doc.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < doc.size()) lines.push_back(doc.substr(start));
      break;
    }
    lines.push_back(doc.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace fload::text
