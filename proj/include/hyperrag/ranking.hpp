#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace hyperrag {

struct RankedPassage {
  std::string passage_id;
  double score = 0.0;

  friend bool operator==(const RankedPassage&, const RankedPassage&) = default;
};

// Ordered by (score desc, passage_id asc); ids are unique.
using RankingList = std::vector<RankedPassage>;

inline bool ranks_before(const RankedPassage& a, const RankedPassage& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.passage_id < b.passage_id;
}

inline void sort_ranking(RankingList& list) { std::sort(list.begin(), list.end(), ranks_before); }

inline RankingList truncate(RankingList list, std::size_t n) {
  if (list.size() > n) list.resize(n);
  return list;
}

inline std::vector<std::string> ranking_ids(const RankingList& list) {
  std::vector<std::string> ids;
  ids.reserve(list.size());
  for (const auto& r : list) ids.push_back(r.passage_id);
  return ids;
}

}  // namespace hyperrag
