#pragma once

// Poincare ball kernel: distances, radial coordinate, exp/log maps at the
// origin and a boundary guard. The ball of curvature -c is the open set
// { x : c * |x|^2 < 1 }.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperrag/errors.hpp"
#include "hyperrag/vector_ops.hpp"

namespace hyperrag {

inline constexpr double kBallEpsilon = 1e-5;

class Curvature {
 public:
  explicit Curvature(double c = 1.0) : c_(c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw DomainError("curvature magnitude must be positive and finite, got " +
                        std::to_string(c));
    }
  }

  double value() const noexcept { return c_; }
  double sqrt_value() const noexcept { return std::sqrt(c_); }

  friend bool operator==(const Curvature&, const Curvature&) = default;

 private:
  double c_;
};

struct TangentVector {
  Vector coords;
};

class HyperbolicPoint {
 public:
  HyperbolicPoint(Vector coords, Curvature c) : coords_(std::move(coords)), c_(c) {
    if (!all_finite(coords_)) throw DomainError("hyperbolic point has non-finite coordinates");
    if (c_.value() * squared_norm(coords_) >= 1.0) {
      throw DomainError("point lies on or outside the Poincare ball boundary");
    }
  }

  static HyperbolicPoint origin(std::size_t dim, Curvature c) {
    return HyperbolicPoint(Vector(dim, 0.0), c);
  }

  std::span<const double> coords() const noexcept { return coords_; }
  const Vector& vector() const noexcept { return coords_; }
  Curvature curvature() const noexcept { return c_; }
  std::size_t dim() const noexcept { return coords_.size(); }

 private:
  Vector coords_;
  Curvature c_;
};

namespace poincare {

// arcosh(1 + delta) for delta >= 0, written as log1p so that tiny separations
// keep their precision instead of collapsing to arcosh(1) = 0.
inline double arcosh_1p(double delta) {
  if (delta < 0.0) delta = 0.0;
  return std::log1p(delta + std::sqrt(delta * (delta + 2.0)));
}

// The delta in arcosh(1 + delta) for the pair (u, v). No checks.
inline double distance_delta(std::span<const double> u, std::span<const double> v, double c) {
  const double du = 1.0 - c * squared_norm(u);
  const double dv = 1.0 - c * squared_norm(v);
  return 2.0 * c * squared_distance(u, v) / (du * dv);
}

// Geodesic distance without validation; callers guarantee interior points of
// equal dimension.
inline double distance(std::span<const double> u, std::span<const double> v, double c) {
  return arcosh_1p(distance_delta(u, v, c)) / std::sqrt(c);
}

}  // namespace poincare

inline double conformal_factor(const HyperbolicPoint& x) {
  return 2.0 / (1.0 - x.curvature().value() * squared_norm(x.coords()));
}

inline double geodesic_distance(const HyperbolicPoint& u, const HyperbolicPoint& v) {
  require_same_dim(u.coords(), v.coords(), "geodesic_distance");
  if (!(u.curvature() == v.curvature())) {
    throw DomainError("geodesic_distance: curvature mismatch");
  }
  return poincare::distance(u.coords(), v.coords(), u.curvature().value());
}

inline double radial_distance(const HyperbolicPoint& x) {
  const double c = x.curvature().value();
  const double sq = squared_norm(x.coords());
  return poincare::arcosh_1p(2.0 * c * sq / (1.0 - c * sq)) / std::sqrt(c);
}

// Rescales x onto the sphere of radius (1 - eps) / sqrt(c) when it lies
// beyond it; otherwise returns x unchanged.
inline HyperbolicPoint clamp_into_ball(std::span<const double> x, Curvature c,
                                       double eps = kBallEpsilon) {
  if (!all_finite(x)) throw DomainError("clamp_into_ball: non-finite input");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("clamp_into_ball: eps must be in (0, 1)");
  const double scaled_norm = c.sqrt_value() * norm(x);
  const double limit = 1.0 - eps;
  Vector out(x.begin(), x.end());
  if (scaled_norm > limit) {
    const double factor = limit / scaled_norm;
    for (double& v : out) v *= factor;
  }
  return HyperbolicPoint(std::move(out), c);
}

// tanh(sqrt(c)|v|) * v / (sqrt(c)|v|). Results whose radius rounds to the
// boundary (|v| beyond ~6/sqrt(c)) are pulled back by clamp_into_ball.
inline HyperbolicPoint exp_map_origin(const TangentVector& v, Curvature c) {
  if (!all_finite(v.coords)) throw DomainError("exp_map_origin: non-finite tangent vector");
  const double n = norm(v.coords);
  if (n == 0.0) return HyperbolicPoint::origin(v.coords.size(), c);
  const double sc = c.sqrt_value();
  const double factor = std::tanh(sc * n) / (sc * n);
  return clamp_into_ball(scaled(v.coords, factor), c);
}

inline TangentVector log_map_origin(const HyperbolicPoint& u) {
  const double n = norm(u.coords());
  if (n == 0.0) return TangentVector{Vector(u.dim(), 0.0)};
  const double sc = u.curvature().sqrt_value();
  const double factor = std::atanh(sc * n) / (sc * n);
  return TangentVector{scaled(u.coords(), factor)};
}

}  // namespace hyperrag
