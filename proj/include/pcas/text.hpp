#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pcas {

namespace detail {

inline bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace detail

/// Splits text into lowercase tokens. ASCII letters and digits are token
/// characters (letters lowercased); any other ASCII byte separates tokens.
/// Bytes >= 0x80 are kept verbatim so multi-byte UTF-8 words stay intact.
/// No stemming, no stopword removal.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (detail::is_ascii_alnum(c) || c >= 0x80) {
      current.push_back(detail::ascii_lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && detail::is_ascii_space(text[begin])) ++begin;
  while (end > begin && detail::is_ascii_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

/// Canonical form used for duplicate detection: trim, collapse internal
/// whitespace runs to a single space, lowercase ASCII letters.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (detail::is_ascii_space(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(detail::ascii_lower(c));
  }
  return out;
}

}  // namespace pcas
