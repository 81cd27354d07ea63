#pragma once

// Mutual-ranking fusion of the Euclidean and hyperbolic passage rankings.
// With zero-based ranks r_E, r_H:
//   s_X    = 1 / (r_X + 1), or 0 when the passage is missing from list X
//   bonus  = 1 / (r_E + r_H + 2) when the passage is in both lists, else 0
//   hybrid = (s_E + s_H) * (1 + bonus)
// For a passage in both lists the product collapses to
// (r_E + r_H + 3) / ((r_E + 1)(r_H + 1)), evaluated as one division so that
// integer-valued results come out exact.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperrag/ranking.hpp"

namespace hyperrag {

struct HybridScore {
  std::string passage_id;
  double s_euclidean = 0.0;
  double s_hyperbolic = 0.0;
  double bonus = 0.0;
  double hybrid = 0.0;
};

inline double reciprocal_rank(std::size_t rank) { return 1.0 / (static_cast<double>(rank) + 1.0); }

inline double hybrid_score(std::optional<std::size_t> rank_e, std::optional<std::size_t> rank_h) {
  if (rank_e && rank_h) {
    const double a = static_cast<double>(*rank_e) + 1.0;
    const double b = static_cast<double>(*rank_h) + 1.0;
    return (a + b + 1.0) / (a * b);
  }
  if (rank_e) return reciprocal_rank(*rank_e);
  if (rank_h) return reciprocal_rank(*rank_h);
  return 0.0;
}

inline std::vector<HybridScore> fuse_detailed(const RankingList& euclidean,
                                              const RankingList& hyperbolic) {
  std::map<std::string, std::pair<std::optional<std::size_t>, std::optional<std::size_t>>> ranks;
  for (std::size_t i = 0; i < euclidean.size(); ++i) ranks[euclidean[i].passage_id].first = i;
  for (std::size_t i = 0; i < hyperbolic.size(); ++i) ranks[hyperbolic[i].passage_id].second = i;

  std::vector<HybridScore> out;
  out.reserve(ranks.size());
  for (const auto& [id, r] : ranks) {
    HybridScore h;
    h.passage_id = id;
    h.s_euclidean = r.first ? reciprocal_rank(*r.first) : 0.0;
    h.s_hyperbolic = r.second ? reciprocal_rank(*r.second) : 0.0;
    if (r.first && r.second) h.bonus = 1.0 / (static_cast<double>(*r.first + *r.second) + 2.0);
    h.hybrid = hybrid_score(r.first, r.second);
    out.push_back(std::move(h));
  }
  std::sort(out.begin(), out.end(), [](const HybridScore& a, const HybridScore& b) {
    if (a.hybrid != b.hybrid) return a.hybrid > b.hybrid;
    return a.passage_id < b.passage_id;
  });
  return out;
}

inline RankingList fuse(const RankingList& euclidean, const RankingList& hyperbolic) {
  RankingList out;
  for (const HybridScore& h : fuse_detailed(euclidean, hyperbolic)) {
    out.push_back(RankedPassage{h.passage_id, h.hybrid});
  }
  return out;
}

}  // namespace hyperrag
