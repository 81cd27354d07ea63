#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperrag/errors.hpp"

namespace hyperrag::text {

inline bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }
inline bool is_alnum(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) != 0; }
inline bool is_upper(char ch) { return std::isupper(static_cast<unsigned char>(ch)) != 0; }
inline char to_lower(char ch) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Lower-cases, trims and collapses runs of whitespace to one space.
inline std::string collapse_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char ch : s) {
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(to_lower(ch));
  }
  return out;
}

// Canonical entity name. Idempotent.
inline std::string normalize_entity(std::string_view surface) {
  std::string out = collapse_lower(surface);
  if (out.empty()) throw DomainError("entity surface is empty after normalization");
  return out;
}

// Lower-cased maximal alphanumeric runs.
inline std::vector<std::string> alnum_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    if (is_alnum(ch)) {
      current.push_back(to_lower(ch));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline bool is_sentence_terminator(char ch) { return ch == '.' || ch == '!' || ch == '?'; }

// Half-open [begin, end) ranges of sentences in `s`, trimmed of surrounding
// whitespace. A sentence ends at '.', '!' or '?' followed by whitespace or
// end of text; any trailing text without a terminator forms a last sentence.
inline std::vector<std::pair<std::size_t, std::size_t>> sentence_spans(std::string_view s) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    while (i < n && is_space(s[i])) ++i;
    if (i >= n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (std::size_t j = i; j < n; ++j) {
      if (is_sentence_terminator(s[j]) && (j + 1 == n || is_space(s[j + 1]))) {
        end = j + 1;
        break;
      }
    }
    std::size_t trimmed_end = end;
    while (trimmed_end > begin && is_space(s[trimmed_end - 1])) --trimmed_end;
    spans.emplace_back(begin, trimmed_end);
    i = end;
  }
  return spans;
}

}  // namespace hyperrag::text
