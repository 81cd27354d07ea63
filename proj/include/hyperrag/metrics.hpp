#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hyperrag/errors.hpp"
#include "hyperrag/ranking.hpp"
#include "hyperrag/text.hpp"

namespace hyperrag {

// |top-k ∩ gold| / |gold|.
inline double recall_at_k(const std::vector<std::string>& retrieved, const std::set<std::string>& gold,
                          std::size_t k) {
  if (gold.empty()) throw DomainError("recall_at_k: gold set is empty");
  std::set<std::string> hits;
  for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i) {
    if (gold.count(retrieved[i])) hits.insert(retrieved[i]);
  }
  return static_cast<double>(hits.size()) / static_cast<double>(gold.size());
}

inline double recall_at_k(const RankingList& retrieved, const std::set<std::string>& gold, std::size_t k) {
  return recall_at_k(ranking_ids(retrieved), gold, k);
}

// Lower-case, drop punctuation, drop the articles a/an/the, collapse
// whitespace.
inline std::string normalize_answer(std::string_view s) {
  std::string no_punct;
  no_punct.reserve(s.size());
  for (char ch : s) {
    if (std::ispunct(static_cast<unsigned char>(ch))) continue;
    no_punct.push_back(text::to_lower(ch));
  }
  std::string out;
  std::size_t i = 0;
  while (i < no_punct.size()) {
    while (i < no_punct.size() && text::is_space(no_punct[i])) ++i;
    const std::size_t start = i;
    while (i < no_punct.size() && !text::is_space(no_punct[i])) ++i;
    std::string_view word(no_punct.data() + start, i - start);
    if (word.empty() || word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return out;
}

inline std::vector<std::string> answer_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  const std::string norm = normalize_answer(s);
  std::size_t i = 0;
  while (i < norm.size()) {
    const std::size_t j = std::min(norm.find(' ', i), norm.size());
    tokens.emplace_back(norm.substr(i, j - i));
    i = j + 1;
  }
  return tokens;
}

inline int exact_match(std::string_view pred, const std::vector<std::string>& gold) {
  const std::string p = normalize_answer(pred);
  for (const auto& g : gold) {
    if (p == normalize_answer(g)) return 1;
  }
  return 0;
}

inline double token_f1(std::string_view pred, const std::vector<std::string>& gold) {
  const auto p_tokens = answer_tokens(pred);
  double best = 0.0;
  for (const auto& g : gold) {
    const auto g_tokens = answer_tokens(g);
    // Two empty answers agree, so EM <= F1 holds for them too.
    if (p_tokens.empty() || g_tokens.empty()) {
      if (p_tokens.empty() && g_tokens.empty()) best = 1.0;
      continue;
    }
    std::map<std::string, int> counts;
    for (const auto& t : g_tokens) ++counts[t];
    int common = 0;
    for (const auto& t : p_tokens) {
      auto it = counts.find(t);
      if (it != counts.end() && it->second > 0) {
        --it->second;
        ++common;
      }
    }
    if (common == 0) continue;
    const double precision = static_cast<double>(common) / static_cast<double>(p_tokens.size());
    const double recall = static_cast<double>(common) / static_cast<double>(g_tokens.size());
    best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

}  // namespace hyperrag
