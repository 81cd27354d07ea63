#pragma once

// Dual-space retrieval: each branch scores facts and passages against the
// query, seeds Personalized PageRank with the resulting masses and ranks
// passages by stationary probability. The Euclidean branch scores by cosine,
// the hyperbolic branch by negative geodesic distance between projected
// points. Both branches share the adjacency and damping.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/geometry.hpp"
#include "hyperrag/graph.hpp"
#include "hyperrag/index_store.hpp"
#include "hyperrag/projection.hpp"
#include "hyperrag/ranking.hpp"

namespace hyperrag {

enum class Space { euclidean, hyperbolic };

inline const char* to_string(Space s) { return s == Space::euclidean ? "euclidean" : "hyperbolic"; }

struct RetrievalConfig {
  std::size_t top_k_facts = 5;
  double seed_mix = 0.5;  // entity share of the seed mass
  double damping = 0.5;   // restart probability
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::size_t passage_prior_limit = 50;

  void validate() const {
    if (top_k_facts == 0) throw ConfigError("top_k_facts must be at least 1");
    if (!(seed_mix >= 0.0 && seed_mix <= 1.0)) throw ConfigError("seed_mix must lie in [0, 1]");
    if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("damping must lie in (0, 1)");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_iter == 0) throw ConfigError("max_iter must be positive");
    if (passage_prior_limit == 0) throw ConfigError("passage_prior_limit must be positive");
  }
};

// Index -> non-negative mass.
using MassMap = std::map<std::uint32_t, double>;

struct SeedDistribution {
  Vector weights;  // node-indexed, sums to 1
  double entity_share = 0.0;
  double passage_share = 0.0;
  bool uniform_fallback = false;
};

struct StationaryDistribution {
  Vector probabilities;
  double residual = 0.0;  // L1 fixed-point residual at return
  std::size_t iterations = 0;
  bool converged = false;
};

// Cosine for the Euclidean space, negative geodesic distance for the
// hyperbolic one.
inline Vector similarity_scores(std::span<const double> query, const std::vector<Vector>& candidates,
                                Space space, double curvature = 1.0) {
  Vector out;
  out.reserve(candidates.size());
  for (const Vector& v : candidates) {
    out.push_back(space == Space::euclidean ? cosine_similarity(query, v)
                                            : -poincare::distance(query, v, curvature));
  }
  return out;
}

// Seed masses must be non-negative. Euclidean scores are clamped at zero;
// hyperbolic scores are shifted by the store-wide minimum so the closest
// candidate gets the most mass. A constant score vector maps to all ones.
inline Vector nonnegative_scores(const Vector& raw, Space space) {
  Vector out(raw.size());
  if (space == Space::euclidean) {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::max(raw[i], 0.0);
    return out;
  }
  if (raw.empty()) return out;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (*hi == *lo) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] - *lo;
  return out;
}

// Indices of the k best scores, ties broken by lower index.
inline std::vector<std::uint32_t> top_indices(const Vector& scores, std::size_t k) {
  std::vector<std::uint32_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0u);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

// Facts as seen by the seeding step: their points in the active space and
// endpoint entity indices.
struct FactView {
  const std::vector<Vector>& points;
  std::span<const std::uint32_t> subjects;
  std::span<const std::uint32_t> objects;
  std::span<const std::uint32_t> entity_passage_degree;
};

// Each of the top-k facts hands its non-negative score to its subject and
// object, divided by that entity's passage degree.
inline MassMap fact_signals(std::span<const double> query, const FactView& facts, std::size_t k,
                            Space space, double curvature = 1.0) {
  if (k == 0) throw ConfigError("fact_signals: k must be at least 1");
  MassMap mass;
  if (facts.points.empty()) return mass;
  const Vector raw = similarity_scores(query, facts.points, space, curvature);
  const Vector scores = nonnegative_scores(raw, space);
  for (std::uint32_t f : top_indices(raw, k)) {
    if (scores[f] <= 0.0) continue;
    auto give = [&](std::uint32_t e) {
      const double degree = std::max<std::uint32_t>(1, facts.entity_passage_degree[e]);
      mass[e] += scores[f] / degree;
    };
    give(facts.subjects[f]);
    if (facts.objects[f] != facts.subjects[f]) give(facts.objects[f]);
  }
  return mass;
}

// Non-negative per-passage scores for the `limit` best-scoring passages.
inline MassMap passage_priors(std::span<const double> query, const std::vector<Vector>& passages,
                              Space space, double curvature = 1.0, std::size_t limit = 50) {
  MassMap mass;
  if (passages.empty()) return mass;
  const Vector raw = similarity_scores(query, passages, space, curvature);
  const Vector scores = nonnegative_scores(raw, space);
  for (std::uint32_t p : top_indices(raw, limit)) {
    if (scores[p] > 0.0) mass[p] = scores[p];
  }
  return mass;
}

// Entity masses scaled to sum to `entity_share`, passage masses to
// 1 - entity_share; an empty side cedes its share. With both sides empty the
// seed is uniform over passages.
inline SeedDistribution build_seed(const MassMap& entity_mass, const MassMap& passage_mass,
                                   std::size_t num_passages, std::size_t num_entities,
                                   double entity_share) {
  const auto total = [](const MassMap& m) {
    double t = 0.0;
    for (const auto& [k, v] : m) t += v;
    return t;
  };
  const double te = total(entity_mass);
  const double tp = total(passage_mass);
  SeedDistribution seed;
  seed.weights.assign(num_passages + num_entities, 0.0);
  if (te <= 0.0 && tp <= 0.0) {
    if (num_passages == 0) throw DataError("cannot build a seed: no passages");
    seed.uniform_fallback = true;
    seed.passage_share = 1.0;
    for (std::size_t p = 0; p < num_passages; ++p) seed.weights[p] = 1.0 / static_cast<double>(num_passages);
    return seed;
  }
  seed.entity_share = te <= 0.0 ? 0.0 : (tp <= 0.0 ? 1.0 : entity_share);
  seed.passage_share = 1.0 - seed.entity_share;
  if (te > 0.0) {
    for (const auto& [e, v] : entity_mass) {
      if (e >= num_entities) throw DomainError("build_seed: entity index out of range");
      seed.weights[num_passages + e] += seed.entity_share * v / te;
    }
  }
  if (tp > 0.0) {
    for (const auto& [p, v] : passage_mass) {
      if (p >= num_passages) throw DomainError("build_seed: passage index out of range");
      seed.weights[p] += seed.passage_share * v / tp;
    }
  }
  return seed;
}

namespace detail {

// damping * s + (1 - damping) * (x W + lost * s), where `lost` is the mass
// sitting on isolated rows. Keeps the total mass at 1.
inline void ppr_step(const Vector& seed, const NormalizedAdjacency& adj, double damping,
                     const Vector& x, Vector& out) {
  const std::size_t n = adj.size();
  std::fill(out.begin(), out.end(), 0.0);
  double lost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    if (adj.isolated[i]) {
      lost += xi;
      continue;
    }
    for (std::size_t k = adj.row_offsets[i]; k < adj.row_offsets[i + 1]; ++k) {
      out[adj.columns[k]] += xi * adj.values[k];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = damping * seed[i] + (1.0 - damping) * (out[i] + lost * seed[i]);
  }
}

inline double l1_distance(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace detail

// Power iteration from pi_0 = seed until the L1 change drops below tol.
inline StationaryDistribution ppr(const SeedDistribution& seed, const NormalizedAdjacency& adj,
                                  double damping, double tol, std::size_t max_iter) {
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("damping must lie in (0, 1)");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (seed.weights.size() != adj.size()) throw DomainError("seed and adjacency sizes differ");
  StationaryDistribution out;
  Vector x = seed.weights;
  Vector next(x.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    detail::ppr_step(seed.weights, adj, damping, x, next);
    const double change = detail::l1_distance(x, next);
    x.swap(next);
    out.iterations = it + 1;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  detail::ppr_step(seed.weights, adj, damping, x, next);
  out.residual = detail::l1_distance(x, next);
  out.probabilities = std::move(x);
  return out;
}

// Passage nodes with positive probability, by (score desc, id asc).
inline RankingList rank_passages(const StationaryDistribution& pi, const std::vector<Passage>& passages) {
  RankingList out;
  for (std::size_t p = 0; p < passages.size(); ++p) {
    if (pi.probabilities.at(p) > 0.0) out.push_back(RankedPassage{passages[p].passage_id, pi.probabilities[p]});
  }
  sort_ranking(out);
  return out;
}

struct BranchResult {
  Space space = Space::euclidean;
  RankingList ranking;
  SeedDistribution seed;
  StationaryDistribution stationary;
};

struct DualRanking {
  BranchResult euclidean;
  std::optional<BranchResult> hyperbolic;
  std::vector<std::string> warnings;
};

// Read-only view over a loaded index. Hyperbolic points for every passage,
// fact and entity are projected once at construction. Safe for concurrent
// retrieve() calls; the index and encoder must outlive the engine.
class RetrievalEngine {
 public:
  RetrievalEngine(const IndexBundle& index, const EncoderClient& encoder, RetrievalConfig cfg = {})
      : index_(index), encoder_(encoder), cfg_(cfg), adjacency_(row_normalize(index.graph)) {
    cfg_.validate();
    if (encoder.fingerprint() != index.meta.encoder_fingerprint) {
      throw ConfigError("encoder '" + encoder.fingerprint() + "' does not match the index encoder '" +
                        index.meta.encoder_fingerprint + "'");
    }
    passage_vecs_ = index.vectors(NodeKind::passage);
    fact_vecs_ = index.vectors(NodeKind::fact);
    if (index.projection) {
      const ProjectionParams& params = *index.projection;
      auto project_all = [&](const std::vector<Vector>& vecs, NodeKind kind) {
        std::vector<Vector> out;
        out.reserve(vecs.size());
        for (const auto& v : vecs) out.push_back(project_node(v, kind, params).vector());
        return out;
      };
      passage_points_ = project_all(passage_vecs_, NodeKind::passage);
      fact_points_ = project_all(fact_vecs_, NodeKind::fact);
      entity_points_ = project_all(index.vectors(NodeKind::entity), NodeKind::entity);
    }
  }

  bool hyperbolic_available() const noexcept { return index_.projection.has_value(); }
  const RetrievalConfig& config() const noexcept { return cfg_; }
  const NormalizedAdjacency& adjacency() const noexcept { return adjacency_; }
  const std::vector<Vector>& passage_points() const noexcept { return passage_points_; }
  const std::vector<Vector>& fact_points() const noexcept { return fact_points_; }
  const std::vector<Vector>& entity_points() const noexcept { return entity_points_; }

  // The query enters hyperbolic space through the passage depth head.
  HyperbolicPoint project_query(std::span<const double> query_vec) const {
    if (!index_.projection) throw ConfigError("index has no trained projection");
    return project_node(query_vec, NodeKind::passage, *index_.projection);
  }

  BranchResult run_branch(std::span<const double> query, Space space) const {
    const double c = space == Space::hyperbolic ? index_.projection->curvature().value() : 1.0;
    const auto& passages = space == Space::euclidean ? passage_vecs_ : passage_points_;
    const auto& facts = space == Space::euclidean ? fact_vecs_ : fact_points_;
    const FactView view{facts, index_.store.fact_subjects(), index_.store.fact_objects(),
                        index_.graph.entity_passage_degree()};
    BranchResult out;
    out.space = space;
    const MassMap entity_mass = fact_signals(query, view, cfg_.top_k_facts, space, c);
    const MassMap passage_mass = passage_priors(query, passages, space, c, cfg_.passage_prior_limit);
    out.seed = build_seed(entity_mass, passage_mass, index_.graph.num_passages(),
                          index_.graph.num_entities(), cfg_.seed_mix);
    out.stationary = ppr(out.seed, adjacency_, cfg_.damping, cfg_.tol, cfg_.max_iter);
    out.ranking = rank_passages(out.stationary, index_.store.passages());
    return out;
  }

  DualRanking retrieve(const std::string& query, bool use_hyperbolic = true) const {
    DualRanking out;
    const EuclideanVector q = encode(query, encoder_);
    out.euclidean = run_branch(q, Space::euclidean);
    if (out.euclidean.seed.uniform_fallback) {
      out.warnings.push_back("euclidean seed fell back to a uniform passage prior");
    }
    if (use_hyperbolic) {
      if (!hyperbolic_available()) {
        out.warnings.push_back("no trained projection in the index; hyperbolic branch disabled");
      } else {
        const HyperbolicPoint qh = project_query(q);
        out.hyperbolic = run_branch(qh.coords(), Space::hyperbolic);
        if (out.hyperbolic->seed.uniform_fallback) {
          out.warnings.push_back("hyperbolic seed fell back to a uniform passage prior");
        }
      }
    }
    return out;
  }

 private:
  const IndexBundle& index_;
  const EncoderClient& encoder_;
  RetrievalConfig cfg_;
  NormalizedAdjacency adjacency_;
  std::vector<Vector> passage_vecs_;
  std::vector<Vector> fact_vecs_;
  std::vector<Vector> passage_points_;
  std::vector<Vector> fact_points_;
  std::vector<Vector> entity_points_;
};

}  // namespace hyperrag
