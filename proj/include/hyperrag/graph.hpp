#pragma once

// Heterogeneous passage/entity graph and its row-normalized adjacency.
// Node indices: passages occupy [0, P), entities occupy [P, P + E), both in
// CorpusStore order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hyperrag/binary_io.hpp"
#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"

namespace hyperrag {

enum class EdgeKind : std::uint8_t { entity_entity = 0, passage_entity = 1, synonymy = 2 };

struct Edge {
  std::uint32_t u = 0;  // u < v
  std::uint32_t v = 0;
  double weight = 0.0;
  EdgeKind kind = EdgeKind::entity_entity;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct GraphConfig {
  double synonymy_threshold = 0.8;
};

class HeterogeneousGraph {
 public:
  static constexpr std::string_view kMagic = "HRGGRF";
  static constexpr std::uint32_t kVersion = 1;

  HeterogeneousGraph() = default;
  HeterogeneousGraph(std::size_t num_passages, std::size_t num_entities, std::vector<Edge> edges)
      : num_passages_(num_passages), num_entities_(num_entities), edges_(std::move(edges)) {
    canonicalize();
  }

  std::size_t num_nodes() const noexcept { return num_passages_ + num_entities_; }
  std::size_t num_passages() const noexcept { return num_passages_; }
  std::size_t num_entities() const noexcept { return num_entities_; }
  std::uint32_t entity_node(std::uint32_t entity_index) const {
    return static_cast<std::uint32_t>(num_passages_ + entity_index);
  }
  bool is_passage(std::uint32_t node) const noexcept { return node < num_passages_; }

  // Sorted by (kind, u, v); one record per (kind, pair).
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t count_edges(EdgeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.kind == kind; }));
  }

  // Number of distinct passages linked to each entity.
  const std::vector<std::uint32_t>& entity_passage_degree() const noexcept { return passage_degree_; }

  // Merges extra edges; duplicates of an existing synonymy or mention edge
  // are dropped.
  void add_edges(const std::vector<Edge>& extra) {
    edges_.insert(edges_.end(), extra.begin(), extra.end());
    canonicalize();
  }

  std::string serialize() const {
    io::BinaryWriter w;
    io::write_header(w, kMagic, kVersion);
    w.u64(num_passages_);
    w.u64(num_entities_);
    w.u64(edges_.size());
    for (const Edge& e : edges_) {
      w.u32(e.u);
      w.u32(e.v);
      w.f64(e.weight);
      w.u8(static_cast<std::uint8_t>(e.kind));
    }
    return w.bytes();
  }

  static HeterogeneousGraph deserialize(std::string_view bytes, const std::string& source) {
    io::BinaryReader r(bytes, source);
    io::read_header(r, kMagic, kVersion);
    const std::uint64_t np = r.u64();
    const std::uint64_t ne = r.u64();
    const std::uint64_t m = r.u64();
    if (m > r.remaining() / 17) r.fail("edge count exceeds remaining bytes");
    std::vector<Edge> edges(static_cast<std::size_t>(m));
    for (Edge& e : edges) {
      e.u = r.u32();
      e.v = r.u32();
      e.weight = r.f64();
      const std::uint8_t kind = r.u8();
      if (kind > static_cast<std::uint8_t>(EdgeKind::synonymy)) r.fail("unknown edge kind");
      e.kind = static_cast<EdgeKind>(kind);
    }
    r.expect_end();
    try {
      return HeterogeneousGraph(static_cast<std::size_t>(np), static_cast<std::size_t>(ne),
                                std::move(edges));
    } catch (const DataError& err) {
      throw CorruptionError(source + ": " + err.what());
    }
  }

 private:
  void canonicalize() {
    const std::size_t n = num_nodes();
    std::map<std::tuple<EdgeKind, std::uint32_t, std::uint32_t>, double> merged;
    for (Edge e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v) throw DataError("self-loop on node " + std::to_string(e.u));
      if (e.v >= n) throw DataError("edge endpoint out of range");
      if (!(e.weight > 0.0)) throw DataError("edge weight must be positive");
      const bool u_passage = e.u < num_passages_;
      const bool v_passage = e.v < num_passages_;
      if (e.kind == EdgeKind::passage_entity ? !(u_passage && !v_passage)
                                             : (u_passage || v_passage)) {
        throw DataError("edge kind does not match its endpoint kinds");
      }
      auto [it, inserted] = merged.emplace(std::make_tuple(e.kind, e.u, e.v), e.weight);
      // Re-adding an existing synonymy or mention edge keeps weight 1.
      if (!inserted && e.kind == EdgeKind::entity_entity) it->second += e.weight;
    }
    edges_.clear();
    for (const auto& [key, w] : merged) {
      edges_.push_back(Edge{std::get<1>(key), std::get<2>(key), w, std::get<0>(key)});
    }
    passage_degree_.assign(num_entities_, 0);
    for (const Edge& e : edges_) {
      if (e.kind == EdgeKind::passage_entity) ++passage_degree_[e.v - num_passages_];
    }
  }

  std::size_t num_passages_ = 0;
  std::size_t num_entities_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> passage_degree_;
};

inline void add_synonymy_edges(HeterogeneousGraph& graph, const CorpusStore& store,
                               const EmbeddingCache& embeddings, double threshold);

// Entity-entity edges weighted by fact count (self-relations add no edge) and
// unit passage-entity edges for every mention, then synonymy edges.
inline HeterogeneousGraph build_graph(const CorpusStore& store, const EmbeddingCache& embeddings,
                                      const GraphConfig& cfg = {}) {
  for (const Entity& e : store.entities()) {
    if (!embeddings.contains(NodeKind::entity, e.entity_id)) {
      throw DataError("missing embedding for entity '" + e.entity_id + "' (" + e.canonical_name +
                      ")");
    }
  }
  const auto np = static_cast<std::uint32_t>(store.passages().size());
  std::vector<Edge> edges;
  for (std::size_t f = 0; f < store.facts().size(); ++f) {
    const std::uint32_t s = store.fact_subjects()[f];
    const std::uint32_t o = store.fact_objects()[f];
    const std::uint32_t p = store.fact_passages()[f];
    if (s != o) edges.push_back(Edge{np + s, np + o, 1.0, EdgeKind::entity_entity});
    edges.push_back(Edge{p, np + s, 1.0, EdgeKind::passage_entity});
    edges.push_back(Edge{p, np + o, 1.0, EdgeKind::passage_entity});
  }
  for (std::uint32_t p = 0; p < np; ++p) {
    for (std::uint32_t e : store.mentions()[p]) {
      edges.push_back(Edge{p, np + e, 1.0, EdgeKind::passage_entity});
    }
  }
  HeterogeneousGraph graph(np, store.entities().size(), std::move(edges));
  add_synonymy_edges(graph, store, embeddings, cfg.synonymy_threshold);
  return graph;
}

// Links every distinct entity pair whose embedding cosine reaches the
// threshold. Quadratic in the entity count.
inline void add_synonymy_edges(HeterogeneousGraph& graph, const CorpusStore& store,
                               const EmbeddingCache& embeddings, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("synonymy threshold must lie in (0, 1]");
  }
  std::vector<EuclideanVector> vecs;
  vecs.reserve(store.entities().size());
  for (const Entity& e : store.entities()) {
    auto v = embeddings.get(NodeKind::entity, e.entity_id);
    if (!v) throw DataError("missing embedding for entity '" + e.entity_id + "'");
    vecs.push_back(std::move(*v));
  }
  std::vector<Edge> extra;
  for (std::uint32_t i = 0; i < vecs.size(); ++i) {
    for (std::uint32_t j = i + 1; j < vecs.size(); ++j) {
      if (cosine_similarity(vecs[i], vecs[j]) >= threshold) {
        extra.push_back(Edge{graph.entity_node(i), graph.entity_node(j), 1.0, EdgeKind::synonymy});
      }
    }
  }
  graph.add_edges(extra);
}

// Sparse row-stochastic matrix in CSR form. Isolated rows are empty and
// flagged.
struct NormalizedAdjacency {
  std::vector<std::size_t> row_offsets;  // size n + 1
  std::vector<std::uint32_t> columns;
  std::vector<double> values;
  std::vector<bool> isolated;

  std::size_t size() const noexcept { return isolated.size(); }
};

inline NormalizedAdjacency row_normalize(const HeterogeneousGraph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<std::map<std::uint32_t, double>> rows(n);
  for (const Edge& e : graph.edges()) {
    rows[e.u][e.v] += e.weight;
    rows[e.v][e.u] += e.weight;
  }
  NormalizedAdjacency adj;
  adj.row_offsets.reserve(n + 1);
  adj.row_offsets.push_back(0);
  adj.isolated.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (const auto& [j, w] : rows[i]) total += w;
    if (rows[i].empty()) adj.isolated[i] = true;
    for (const auto& [j, w] : rows[i]) {
      adj.columns.push_back(j);
      adj.values.push_back(w / total);
    }
    adj.row_offsets.push_back(adj.columns.size());
  }
  return adj;
}

}  // namespace hyperrag
