#pragma once

// Depth-aware projection from Euclidean embeddings into the Poincare ball and
// the bidirectional passage/fact margin objective that trains it.
//
// Per node with Euclidean embedding z (dimension d) and kind k:
//   u   = tanh(W_phi z + b_phi)                   hierarchy signal
//   dv  = sigmoid(w_k . u + b_k)                  depth score
//   zt  = tanh(W_rho [z ; u] + b_rho)             fused candidate
//   m   = sigmoid(W_g zt)                         per-dimension gate
//   z*  = m * z + (1 - m) * zt
//   zh  = (alpha + beta dv) z* / |z*|
//   out = exp_0(zh), pulled inside the ball by clamp_into_ball
//
// Gradients are derived by hand; tests compare them with central finite
// differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperrag/binary_io.hpp"
#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/geometry.hpp"
#include "hyperrag/vector_ops.hpp"

namespace hyperrag {

struct HierarchySignal {
  Vector u;
};

struct DepthScore {
  double value = 0.0;
};

struct ProjectionConfig {
  std::size_t dim = 256;
  double norm_offset = 0.4;  // alpha
  double norm_scale = 0.5;   // beta
  double curvature = 1.0;
};

// All trainable weights live in one flat buffer so the optimizer, the
// finite-difference checks and serialization can treat them uniformly.
// Layout: W_phi (d x d), b_phi (d), three depth heads (d weights + 1 bias,
// indexed by NodeKind), W_g (d x d), W_rho (d x 2d), b_rho (d).
class ProjectionParams {
 public:
  static constexpr std::string_view kMagic = "HRGPRJ";
  static constexpr std::uint32_t kVersion = 1;

  ProjectionParams(std::size_t dim, double norm_offset, double norm_scale, Curvature c)
      : dim_(dim), norm_offset_(norm_offset), norm_scale_(norm_scale), c_(c),
        values_(parameter_count(dim), 0.0) {
    if (dim_ == 0) throw ConfigError("projection dimension must be positive");
    if (!(norm_offset_ > 0.0) || !(norm_scale_ > 0.0) || norm_offset_ + norm_scale_ > 1.0) {
      throw ConfigError("radius offsets must satisfy alpha > 0, beta > 0, alpha + beta <= 1");
    }
  }

  explicit ProjectionParams(const ProjectionConfig& cfg)
      : ProjectionParams(cfg.dim, cfg.norm_offset, cfg.norm_scale, Curvature(cfg.curvature)) {}

  // Weights uniform in [-scale, scale] from a seeded mt19937_64; biases zero.
  static ProjectionParams initialize(const ProjectionConfig& cfg, std::uint64_t seed,
                                     double scale = 0.05) {
    ProjectionParams p(cfg);
    std::mt19937_64 rng(seed);
    auto fill = [&](std::span<double> block) {
      for (double& w : block) {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w = (2.0 * unit - 1.0) * scale;
      }
    };
    fill(p.phi_weight());
    for (NodeKind k : {NodeKind::passage, NodeKind::entity, NodeKind::fact}) fill(p.head_weight(k));
    fill(p.gate_weight());
    fill(p.rho_weight());
    return p;
  }

  static std::size_t parameter_count(std::size_t d) { return 4 * d * d + 2 * d + 3 * (d + 1); }

  std::size_t dim() const noexcept { return dim_; }
  double norm_offset() const noexcept { return norm_offset_; }
  double norm_scale() const noexcept { return norm_scale_; }
  Curvature curvature() const noexcept { return c_; }

  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }

  std::span<double> phi_weight() { return block(off_phi_w(), dim_ * dim_); }
  std::span<double> phi_bias() { return block(off_phi_b(), dim_); }
  std::span<double> head_weight(NodeKind k) { return block(off_head(k), dim_); }
  double& head_bias(NodeKind k) { return values_[off_head(k) + dim_]; }
  std::span<double> gate_weight() { return block(off_gate(), dim_ * dim_); }
  std::span<double> rho_weight() { return block(off_rho_w(), 2 * dim_ * dim_); }
  std::span<double> rho_bias() { return block(off_rho_b(), dim_); }

  std::span<const double> phi_weight() const { return block(off_phi_w(), dim_ * dim_); }
  std::span<const double> phi_bias() const { return block(off_phi_b(), dim_); }
  std::span<const double> head_weight(NodeKind k) const { return block(off_head(k), dim_); }
  double head_bias(NodeKind k) const { return values_[off_head(k) + dim_]; }
  std::span<const double> gate_weight() const { return block(off_gate(), dim_ * dim_); }
  std::span<const double> rho_weight() const { return block(off_rho_w(), 2 * dim_ * dim_); }
  std::span<const double> rho_bias() const { return block(off_rho_b(), dim_); }

  // Offsets into flat(), exposed for gradient buffers of the same layout.
  std::size_t off_phi_w() const { return 0; }
  std::size_t off_phi_b() const { return dim_ * dim_; }
  std::size_t off_head(NodeKind k) const {
    return off_phi_b() + dim_ + static_cast<std::size_t>(k) * (dim_ + 1);
  }
  std::size_t off_gate() const { return off_phi_b() + dim_ + 3 * (dim_ + 1); }
  std::size_t off_rho_w() const { return off_gate() + dim_ * dim_; }
  std::size_t off_rho_b() const { return off_rho_w() + 2 * dim_ * dim_; }

  std::string serialize() const {
    io::BinaryWriter w;
    io::write_header(w, kMagic, kVersion);
    w.u64(dim_);
    w.f64(norm_offset_);
    w.f64(norm_scale_);
    w.f64(c_.value());
    w.f64s(values_);
    return w.bytes();
  }

  static ProjectionParams deserialize(std::string_view bytes, const std::string& source) {
    io::BinaryReader r(bytes, source);
    io::read_header(r, kMagic, kVersion);
    const std::uint64_t dim = r.u64();
    const double alpha = r.f64();
    const double beta = r.f64();
    const double c = r.f64();
    if (dim == 0 || dim > (1u << 20)) r.fail("implausible projection dimension");
    std::optional<ProjectionParams> p;
    try {
      p.emplace(static_cast<std::size_t>(dim), alpha, beta, Curvature(c));
    } catch (const std::exception& e) {
      r.fail(std::string("invalid projection header: ") + e.what());
    }
    const auto count = parameter_count(static_cast<std::size_t>(dim));
    Vector values = r.f64s(count);
    r.expect_end();
    std::copy(values.begin(), values.end(), p->values_.begin());
    return std::move(*p);
  }

  friend bool operator==(const ProjectionParams& a, const ProjectionParams& b) {
    return a.dim_ == b.dim_ && a.norm_offset_ == b.norm_offset_ &&
           a.norm_scale_ == b.norm_scale_ && a.c_ == b.c_ && a.values_ == b.values_;
  }

 private:
  std::span<double> block(std::size_t off, std::size_t n) { return {values_.data() + off, n}; }
  std::span<const double> block(std::size_t off, std::size_t n) const {
    return {values_.data() + off, n};
  }

  std::size_t dim_;
  double norm_offset_;
  double norm_scale_;
  Curvature c_;
  Vector values_;
};

namespace detail {

// out = W x (+ b), W row-major rows x cols.
inline void matvec(std::span<const double> w, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

// out += W^T g.
inline void matvec_transposed_add(std::span<const double> w, std::size_t rows, std::size_t cols,
                                  std::span<const double> g, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    const double* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += row[j] * gi;
  }
}

// G += g x^T.
inline void outer_add(std::span<double> grad, std::size_t rows, std::size_t cols,
                      std::span<const double> g, std::span<const double> x) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    double* row = grad.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
  }
}

inline void require_dim(std::span<const double> z, std::size_t d, const char* what) {
  if (z.size() != d) {
    throw DomainError(std::string(what) + ": expected dimension " + std::to_string(d) + ", got " +
                      std::to_string(z.size()));
  }
}

}  // namespace detail

inline HierarchySignal hierarchy_features(std::span<const double> z, const ProjectionParams& params) {
  const std::size_t d = params.dim();
  detail::require_dim(z, d, "hierarchy_features");
  HierarchySignal s{Vector(d)};
  detail::matvec(params.phi_weight(), d, d, z, s.u);
  const auto b = params.phi_bias();
  for (std::size_t i = 0; i < d; ++i) s.u[i] = std::tanh(s.u[i] + b[i]);
  return s;
}

inline DepthScore predict_depth(const HierarchySignal& u, NodeKind kind, const ProjectionParams& params) {
  detail::require_dim(u.u, params.dim(), "predict_depth");
  return DepthScore{sigmoid(dot(params.head_weight(kind), u.u) + params.head_bias(kind))};
}

inline Vector gated_fuse(std::span<const double> z, const HierarchySignal& u,
                         const ProjectionParams& params) {
  const std::size_t d = params.dim();
  detail::require_dim(z, d, "gated_fuse");
  detail::require_dim(u.u, d, "gated_fuse");
  Vector joined(z.begin(), z.end());
  joined.insert(joined.end(), u.u.begin(), u.u.end());
  Vector zt(d);
  detail::matvec(params.rho_weight(), d, 2 * d, joined, zt);
  const auto b = params.rho_bias();
  for (std::size_t i = 0; i < d; ++i) zt[i] = std::tanh(zt[i] + b[i]);
  Vector gate(d);
  detail::matvec(params.gate_weight(), d, d, zt, gate);
  Vector out(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double m = sigmoid(gate[i]);
    out[i] = m * z[i] + (1.0 - m) * zt[i];
  }
  return out;
}

// A zero refined vector stays zero: its norm is replaced by 1e-12 before the
// division.
inline Vector radial_align(std::span<const double> refined, DepthScore depth,
                           const ProjectionParams& params) {
  double n = norm(refined);
  if (n == 0.0) n = 1e-12;
  const double radius = params.norm_offset() + params.norm_scale() * depth.value;
  return scaled(refined, radius / n);
}

// Intermediate values of one forward pass, kept for the backward pass.
struct ProjectionTrace {
  NodeKind kind = NodeKind::passage;
  Vector z;
  Vector u;
  Vector zt;
  Vector gate;  // m
  Vector refined;
  double depth = 0.0;
  double refined_norm = 0.0;
  double radius = 0.0;
  bool clamped = false;
  Vector point;
};

inline ProjectionTrace project_traced(std::span<const double> z, NodeKind kind,
                                      const ProjectionParams& params) {
  ProjectionTrace t;
  t.kind = kind;
  t.z.assign(z.begin(), z.end());
  HierarchySignal u = hierarchy_features(z, params);
  t.depth = predict_depth(u, kind, params).value;

  const std::size_t d = params.dim();
  Vector joined(z.begin(), z.end());
  joined.insert(joined.end(), u.u.begin(), u.u.end());
  t.zt.resize(d);
  detail::matvec(params.rho_weight(), d, 2 * d, joined, t.zt);
  const auto b = params.rho_bias();
  for (std::size_t i = 0; i < d; ++i) t.zt[i] = std::tanh(t.zt[i] + b[i]);
  t.gate.resize(d);
  detail::matvec(params.gate_weight(), d, d, t.zt, t.gate);
  t.refined.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    t.gate[i] = sigmoid(t.gate[i]);
    t.refined[i] = t.gate[i] * z[i] + (1.0 - t.gate[i]) * t.zt[i];
  }
  t.u = std::move(u.u);

  const Vector aligned = radial_align(t.refined, DepthScore{t.depth}, params);
  t.refined_norm = norm(t.refined);
  t.radius = params.norm_offset() + params.norm_scale() * t.depth;
  const Curvature c = params.curvature();
  t.clamped = std::tanh(c.sqrt_value() * t.radius) > 1.0 - kBallEpsilon;
  t.point = exp_map_origin(TangentVector{aligned}, c).vector();
  return t;
}

inline HyperbolicPoint project_node(std::span<const double> z, NodeKind kind,
                                    const ProjectionParams& params) {
  ProjectionTrace t = project_traced(z, kind, params);
  return clamp_into_ball(t.point, params.curvature());
}

// Accumulates dLoss/dParams into `grad` (same layout as params.flat()) given
// dLoss/dPoint for the traced node.
inline void project_backward(const ProjectionTrace& t, std::span<const double> grad_point,
                             const ProjectionParams& params, std::span<double> grad) {
  const std::size_t d = params.dim();
  const double sc = params.curvature().sqrt_value();
  if (t.refined_norm == 0.0) return;  // output pinned at the origin

  // point = s(r) * e with s = tanh(sqrt(c) r) / sqrt(c), e = z* / |z*|.
  const double th = std::tanh(sc * t.radius);
  const double s = th / sc;
  Vector e(d);
  for (std::size_t i = 0; i < d; ++i) e[i] = t.refined[i] / t.refined_norm;
  const double g_dot_e = dot(grad_point, e);

  const double g_depth = t.clamped ? 0.0 : g_dot_e * (1.0 - th * th) * params.norm_scale();

  Vector g_refined(d);
  for (std::size_t i = 0; i < d; ++i) {
    g_refined[i] = (s / t.refined_norm) * (grad_point[i] - g_dot_e * e[i]);
  }

  // z* = m z + (1 - m) zt, m = sigmoid(W_g zt).
  Vector g_zt(d);
  Vector g_gate_pre(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double m = t.gate[i];
    g_zt[i] = g_refined[i] * (1.0 - m);
    g_gate_pre[i] = g_refined[i] * (t.z[i] - t.zt[i]) * m * (1.0 - m);
  }
  detail::outer_add(grad.subspan(params.off_gate(), d * d), d, d, g_gate_pre, t.zt);
  detail::matvec_transposed_add(params.gate_weight(), d, d, g_gate_pre, g_zt);

  // zt = tanh(W_rho [z ; u] + b_rho).
  Vector g_rho_pre(d);
  for (std::size_t i = 0; i < d; ++i) g_rho_pre[i] = g_zt[i] * (1.0 - t.zt[i] * t.zt[i]);
  Vector joined(t.z);
  joined.insert(joined.end(), t.u.begin(), t.u.end());
  detail::outer_add(grad.subspan(params.off_rho_w(), 2 * d * d), d, 2 * d, g_rho_pre, joined);
  {
    auto gb = grad.subspan(params.off_rho_b(), d);
    for (std::size_t i = 0; i < d; ++i) gb[i] += g_rho_pre[i];
  }
  Vector g_joined(2 * d, 0.0);
  detail::matvec_transposed_add(params.rho_weight(), d, 2 * d, g_rho_pre, g_joined);
  Vector g_u(g_joined.begin() + static_cast<std::ptrdiff_t>(d), g_joined.end());

  // dv = sigmoid(w_k . u + b_k).
  const double g_head_pre = g_depth * t.depth * (1.0 - t.depth);
  if (g_head_pre != 0.0) {
    const std::size_t off = params.off_head(t.kind);
    const auto w = params.head_weight(t.kind);
    for (std::size_t i = 0; i < d; ++i) {
      grad[off + i] += g_head_pre * t.u[i];
      g_u[i] += g_head_pre * w[i];
    }
    grad[off + d] += g_head_pre;
  }

  // u = tanh(W_phi z + b_phi).
  Vector g_phi_pre(d);
  for (std::size_t i = 0; i < d; ++i) g_phi_pre[i] = g_u[i] * (1.0 - t.u[i] * t.u[i]);
  detail::outer_add(grad.subspan(params.off_phi_w(), d * d), d, d, g_phi_pre, t.z);
  auto gb = grad.subspan(params.off_phi_b(), d);
  for (std::size_t i = 0; i < d; ++i) gb[i] += g_phi_pre[i];
}

// Adds scale * dd(u, v)/du to grad_u and scale * dd(u, v)/dv to grad_v.
// At u == v the distance is not differentiable and nothing is added.
inline void distance_gradient(std::span<const double> u, std::span<const double> v, double c,
                              double scale, std::span<double> grad_u, std::span<double> grad_v) {
  const double a = 1.0 - c * squared_norm(u);
  const double b = 1.0 - c * squared_norm(v);
  const double sq = squared_distance(u, v);
  const double delta = 2.0 * c * sq / (a * b);
  if (delta <= 0.0) return;
  const double d_delta = 1.0 / (std::sqrt(c) * std::sqrt(delta * (delta + 2.0)));
  const double k = scale * d_delta * 4.0 * c / (a * b);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u[i] - v[i];
    grad_u[i] += k * (diff + c * sq * u[i] / a);
    grad_v[i] += k * (-diff + c * sq * v[i] / b);
  }
}

inline double margin_hinge(double d_pos, double d_neg, double margin) {
  return std::max(0.0, d_pos - d_neg + margin);
}

// [d(p, f+) - d(p, f-) + margin]_+ on projected points.
inline double loss_passage_to_fact(const HyperbolicPoint& passage, const HyperbolicPoint& fact_pos,
                                   const HyperbolicPoint& fact_neg, double margin) {
  return margin_hinge(geodesic_distance(passage, fact_pos), geodesic_distance(passage, fact_neg),
                      margin);
}

inline double loss_fact_to_passage(const HyperbolicPoint& fact, const HyperbolicPoint& passage_pos,
                                   const HyperbolicPoint& passage_neg, double margin) {
  return margin_hinge(geodesic_distance(fact, passage_pos), geodesic_distance(fact, passage_neg),
                      margin);
}

// Same losses starting from Euclidean embeddings.
inline double loss_passage_to_fact(std::span<const double> passage, std::span<const double> fact_pos,
                                   std::span<const double> fact_neg, const ProjectionParams& params,
                                   double margin) {
  return loss_passage_to_fact(project_node(passage, NodeKind::passage, params),
                              project_node(fact_pos, NodeKind::fact, params),
                              project_node(fact_neg, NodeKind::fact, params), margin);
}

inline double loss_fact_to_passage(std::span<const double> fact, std::span<const double> passage_pos,
                                   std::span<const double> passage_neg,
                                   const ProjectionParams& params, double margin) {
  return loss_fact_to_passage(project_node(fact, NodeKind::fact, params),
                              project_node(passage_pos, NodeKind::passage, params),
                              project_node(passage_neg, NodeKind::passage, params), margin);
}

// Passage <-> fact containment lists. Each fact has exactly one source
// passage in a CorpusStore, but the structure allows several.
struct Associations {
  std::vector<std::vector<std::uint32_t>> facts_of_passage;  // sorted
  std::vector<std::vector<std::uint32_t>> passages_of_fact;  // sorted

  static Associations from_store(const CorpusStore& store) {
    Associations a;
    a.facts_of_passage.resize(store.passages().size());
    a.passages_of_fact.resize(store.facts().size());
    for (std::uint32_t f = 0; f < store.facts().size(); ++f) {
      const std::uint32_t p = store.fact_passages()[f];
      a.facts_of_passage[p].push_back(f);
      a.passages_of_fact[f].push_back(p);
    }
    return a;
  }
};

// Unbiased draw from [0, n) via rejection on the raw 64-bit output; unlike
// std::uniform_int_distribution the sequence is identical on every standard
// library.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Uniform over [0, num_candidates) minus `associated` (sorted, unique).
// nullopt when every candidate is associated.
inline std::optional<std::uint32_t> sample_negative(std::span<const std::uint32_t> associated,
                                                    std::uint32_t num_candidates,
                                                    std::mt19937_64& rng) {
  std::size_t in_range = 0;
  for (std::uint32_t a : associated) in_range += a < num_candidates ? 1 : 0;
  if (in_range >= num_candidates) return std::nullopt;
  auto pick = static_cast<std::uint32_t>(uniform_index(rng, num_candidates - in_range));
  // Map the pick-th free slot to its candidate index.
  for (std::uint32_t a : associated) {
    if (a <= pick) ++pick;
    else break;
  }
  return pick;
}

struct ContrastiveTerm {
  NodeKind anchor_kind = NodeKind::passage;  // passage: p -> f term; fact: f -> p term
  std::uint32_t anchor = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
};

struct ObjectiveValue {
  double loss = 0.0;
  std::size_t active_terms = 0;
  Vector gradient;  // empty unless requested
};

// Sum of hinge terms over projected passages/facts. Each node is projected
// once; its point gradient is accumulated over all terms before a single
// backward pass.
inline ObjectiveValue contrastive_objective(const ProjectionParams& params,
                                            const std::vector<EuclideanVector>& passages,
                                            const std::vector<EuclideanVector>& facts,
                                            const std::vector<ContrastiveTerm>& terms,
                                            double margin, bool with_gradient) {
  const std::size_t d = params.dim();
  const double c = params.curvature().value();
  std::vector<std::optional<ProjectionTrace>> p_trace(passages.size());
  std::vector<std::optional<ProjectionTrace>> f_trace(facts.size());
  auto passage_point = [&](std::uint32_t i) -> const ProjectionTrace& {
    if (!p_trace[i]) p_trace[i] = project_traced(passages.at(i), NodeKind::passage, params);
    return *p_trace[i];
  };
  auto fact_point = [&](std::uint32_t i) -> const ProjectionTrace& {
    if (!f_trace[i]) f_trace[i] = project_traced(facts.at(i), NodeKind::fact, params);
    return *f_trace[i];
  };

  std::vector<Vector> p_grad(passages.size());
  std::vector<Vector> f_grad(facts.size());
  auto grad_slot = [&](std::vector<Vector>& slots, std::uint32_t i) -> std::span<double> {
    if (slots[i].empty()) slots[i].assign(d, 0.0);
    return slots[i];
  };

  ObjectiveValue out;
  for (const ContrastiveTerm& term : terms) {
    const bool from_passage = term.anchor_kind == NodeKind::passage;
    const ProjectionTrace& a = from_passage ? passage_point(term.anchor) : fact_point(term.anchor);
    const ProjectionTrace& pos = from_passage ? fact_point(term.positive) : passage_point(term.positive);
    const ProjectionTrace& neg = from_passage ? fact_point(term.negative) : passage_point(term.negative);
    const double d_pos = poincare::distance(a.point, pos.point, c);
    const double d_neg = poincare::distance(a.point, neg.point, c);
    const double value = d_pos - d_neg + margin;
    // Subgradient at the kink is zero.
    if (value <= 0.0) continue;
    out.loss += value;
    ++out.active_terms;
    if (!with_gradient) continue;
    auto& anchor_slots = from_passage ? p_grad : f_grad;
    auto& other_slots = from_passage ? f_grad : p_grad;
    distance_gradient(a.point, pos.point, c, 1.0, grad_slot(anchor_slots, term.anchor),
                      grad_slot(other_slots, term.positive));
    distance_gradient(a.point, neg.point, c, -1.0, grad_slot(anchor_slots, term.anchor),
                      grad_slot(other_slots, term.negative));
  }

  if (with_gradient) {
    out.gradient.assign(params.flat().size(), 0.0);
    for (std::size_t i = 0; i < passages.size(); ++i) {
      if (!p_grad[i].empty()) project_backward(*p_trace[i], p_grad[i], params, out.gradient);
    }
    for (std::size_t i = 0; i < facts.size(); ++i) {
      if (!f_grad[i].empty()) project_backward(*f_trace[i], f_grad[i], params, out.gradient);
    }
  }
  return out;
}

struct TrainConfig {
  double margin = 0.1;
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::size_t negatives_per_positive = 1;
  std::uint64_t seed = 42;
  // Terms per gradient step; 0 means one full-batch step per epoch.
  std::size_t batch_size = 0;

  void validate() const {
    if (!(margin > 0.0)) throw ConfigError("margin must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (negatives_per_positive == 0) throw ConfigError("negatives per positive must be positive");
  }
};

struct TrainResult {
  ProjectionParams params;
  std::vector<double> loss_trace;  // per epoch, before that epoch's update
  std::size_t skipped_anchors = 0;  // anchors without any valid negative
  std::size_t steps = 0;
};

// One epoch of sampled terms: every (passage, fact) containment pair in both
// directions, each with `negatives_per_positive` fresh negatives.
inline std::vector<ContrastiveTerm> sample_terms(const Associations& assoc, std::size_t negatives,
                                                 std::mt19937_64& rng, std::size_t* skipped = nullptr) {
  const auto num_passages = static_cast<std::uint32_t>(assoc.facts_of_passage.size());
  const auto num_facts = static_cast<std::uint32_t>(assoc.passages_of_fact.size());
  std::vector<ContrastiveTerm> terms;
  std::size_t skipped_here = 0;
  for (std::uint32_t p = 0; p < num_passages; ++p) {
    const auto& positives = assoc.facts_of_passage[p];
    if (positives.empty()) continue;
    bool any = false;
    for (std::uint32_t f : positives) {
      for (std::size_t n = 0; n < negatives; ++n) {
        auto neg = sample_negative(positives, num_facts, rng);
        if (!neg) break;
        any = true;
        terms.push_back(ContrastiveTerm{NodeKind::passage, p, f, *neg});
      }
    }
    if (!any) ++skipped_here;
  }
  for (std::uint32_t f = 0; f < num_facts; ++f) {
    const auto& positives = assoc.passages_of_fact[f];
    if (positives.empty()) continue;
    bool any = false;
    for (std::uint32_t p : positives) {
      for (std::size_t n = 0; n < negatives; ++n) {
        auto neg = sample_negative(positives, num_passages, rng);
        if (!neg) break;
        any = true;
        terms.push_back(ContrastiveTerm{NodeKind::fact, f, p, *neg});
      }
    }
    if (!any) ++skipped_here;
  }
  if (skipped) *skipped = skipped_here;
  return terms;
}

// Plain gradient descent on the summed objective with the given epoch count.
// Single-threaded with a fixed sample order, so equal inputs give
// bit-identical parameters.
inline TrainResult train(const std::vector<EuclideanVector>& passages,
                         const std::vector<EuclideanVector>& facts, const Associations& assoc,
                         const ProjectionConfig& proj_cfg, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult result{ProjectionParams::initialize(proj_cfg, cfg.seed), {}, 0, 0};
  std::mt19937_64 rng(cfg.seed ^ 0x6a09e667f3bcc908ULL);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::size_t skipped = 0;
    std::vector<ContrastiveTerm> terms = sample_terms(assoc, cfg.negatives_per_positive, rng, &skipped);
    if (epoch == 0) {
      result.skipped_anchors = skipped;
      if (terms.empty()) {
        throw DataError("no trainable passage/fact pairs: need a passage with at least one "
                        "associated and one non-associated fact");
      }
    }
    const std::size_t batch = cfg.batch_size == 0 ? terms.size() : cfg.batch_size;
    if (batch < terms.size()) {
      for (std::size_t i = terms.size(); i > 1; --i) {
        std::swap(terms[i - 1], terms[uniform_index(rng, i)]);
      }
    }
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < terms.size(); at += batch) {
      const std::vector<ContrastiveTerm> slice(
          terms.begin() + static_cast<std::ptrdiff_t>(at),
          terms.begin() + static_cast<std::ptrdiff_t>(std::min(terms.size(), at + batch)));
      ObjectiveValue obj = contrastive_objective(result.params, passages, facts, slice, cfg.margin, true);
      epoch_loss += obj.loss;
      auto w = result.params.flat();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * obj.gradient[i];
      ++result.steps;
    }
    result.loss_trace.push_back(epoch_loss);
  }
  return result;
}

}  // namespace hyperrag
