#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperrag/geometry.hpp"

using namespace hyperrag;

namespace {

Vector random_ball_point(std::mt19937_64& rng, std::size_t d, double c) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> r(0.0, 0.95);
  Vector x(d);
  for (double& v : x) v = g(rng);
  const double scale = r(rng) / (std::sqrt(c) * norm(x));
  for (double& v : x) v *= scale;
  return x;
}

}  // namespace

TEST(Curvature, RejectsNonPositive) {
  EXPECT_THROW(Curvature(0.0), DomainError);
  EXPECT_THROW(Curvature(-1.0), DomainError);
  EXPECT_THROW(Curvature(std::nan("")), DomainError);
}

TEST(HyperbolicPoint, RejectsBoundaryAndOutside) {
  EXPECT_THROW(HyperbolicPoint({1.0, 0.0}, Curvature(1.0)), DomainError);
  EXPECT_THROW(HyperbolicPoint({0.8, 0.0}, Curvature(2.0)), DomainError);
  EXPECT_NO_THROW(HyperbolicPoint({0.7, 0.0}, Curvature(2.0)));
}

TEST(ConformalFactor, OriginAndHalfRadius) {
  EXPECT_DOUBLE_EQ(conformal_factor(HyperbolicPoint::origin(3, Curvature(1.0))), 2.0);
  EXPECT_NEAR(conformal_factor(HyperbolicPoint({0.5, 0.0}, Curvature(1.0))), 8.0 / 3.0, 1e-15);
}

TEST(GeodesicDistance, IdentityIsZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    HyperbolicPoint u(random_ball_point(rng, 4, 1.0), Curvature(1.0));
    EXPECT_EQ(geodesic_distance(u, u), 0.0);
  }
}

TEST(GeodesicDistance, OppositeHalfPointsGiveLn9) {
  HyperbolicPoint u({0.5, 0.0}, Curvature(1.0));
  HyperbolicPoint v({-0.5, 0.0}, Curvature(1.0));
  EXPECT_NEAR(geodesic_distance(u, v), std::log(9.0), 1e-12);
}

TEST(GeodesicDistance, FromOriginEqualsRadial) {
  std::mt19937_64 rng(2);
  for (double c : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 100; ++i) {
      HyperbolicPoint x(random_ball_point(rng, 5, c), Curvature(c));
      EXPECT_NEAR(geodesic_distance(HyperbolicPoint::origin(5, Curvature(c)), x), radial_distance(x), 1e-12);
    }
  }
}

TEST(GeodesicDistance, RejectsMismatch) {
  HyperbolicPoint a({0.1, 0.0}, Curvature(1.0));
  HyperbolicPoint b({0.1, 0.0, 0.0}, Curvature(1.0));
  HyperbolicPoint c({0.1, 0.0}, Curvature(2.0));
  EXPECT_THROW(geodesic_distance(a, b), DomainError);
  EXPECT_THROW(geodesic_distance(a, c), DomainError);
}

TEST(GeodesicDistance, SymmetricAndTriangle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    HyperbolicPoint a(random_ball_point(rng, 3, 1.0), Curvature(1.0));
    HyperbolicPoint b(random_ball_point(rng, 3, 1.0), Curvature(1.0));
    HyperbolicPoint c(random_ball_point(rng, 3, 1.0), Curvature(1.0));
    EXPECT_EQ(geodesic_distance(a, b), geodesic_distance(b, a));
    EXPECT_LE(geodesic_distance(a, c), geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-9);
  }
}

TEST(RadialDistance, Values) {
  EXPECT_EQ(radial_distance(HyperbolicPoint::origin(2, Curvature(1.0))), 0.0);
  EXPECT_NEAR(radial_distance(HyperbolicPoint({0.5, 0.0}, Curvature(1.0))), std::log(3.0), 1e-12);
}

TEST(RadialDistance, MatchesArtanhIdentity) {
  std::mt19937_64 rng(4);
  for (double c : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 100; ++i) {
      HyperbolicPoint x(random_ball_point(rng, 6, c), Curvature(c));
      const double oracle = 2.0 * std::atanh(std::sqrt(c) * norm(x.coords())) / std::sqrt(c);
      if (oracle == 0.0) continue;
      EXPECT_LT(std::abs(radial_distance(x) - oracle) / oracle, 1e-12);
    }
  }
}

TEST(RadialDistance, MonotoneInNorm) {
  double prev = -1.0;
  for (int i = 0; i < 100; ++i) {
    const double r = 0.0099 * i;
    const double d = radial_distance(HyperbolicPoint({r, 0.0}, Curvature(1.0)));
    EXPECT_GT(d, prev);
    prev = d;
  }
}

TEST(ExpMap, Values) {
  EXPECT_EQ(exp_map_origin(TangentVector{{0.0, 0.0}}, Curvature(1.0)).vector(), (Vector{0.0, 0.0}));
  const auto p = exp_map_origin(TangentVector{{1.0, 0.0}}, Curvature(1.0));
  EXPECT_NEAR(p.coords()[0], std::tanh(1.0), 1e-15);
  EXPECT_EQ(p.coords()[1], 0.0);
}

TEST(ExpMap, PreservesDirection) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    Vector v{g(rng), g(rng), g(rng)};
    const auto p = exp_map_origin(TangentVector{v}, Curvature(1.5));
    const double k = p.coords()[0] / v[0];
    EXPECT_GE(k, 0.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p.coords()[j], k * v[j], 1e-12);
  }
}

TEST(ExpMap, LargeTangentStaysInsideBall) {
  const auto p = exp_map_origin(TangentVector{{50.0, 0.0}}, Curvature(1.0));
  EXPECT_LE(norm(p.coords()), 1.0 - kBallEpsilon + 1e-15);
}

TEST(LogMap, Values) {
  EXPECT_EQ(log_map_origin(HyperbolicPoint::origin(2, Curvature(1.0))).coords, (Vector{0.0, 0.0}));
  const auto v = log_map_origin(HyperbolicPoint({std::tanh(1.0), 0.0}, Curvature(1.0)));
  EXPECT_NEAR(v.coords[0], 1.0, 1e-12);
  EXPECT_EQ(v.coords[1], 0.0);
}

TEST(LogMap, InvertsExpMap) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> len(0.0, 3.0);
  for (double c : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 200; ++i) {
      Vector v{g(rng), g(rng), g(rng), g(rng)};
      const double s = len(rng) / norm(v);
      for (double& x : v) x *= s;
      const auto back = log_map_origin(exp_map_origin(TangentVector{v}, Curvature(c)));
      for (std::size_t j = 0; j < v.size(); ++j) EXPECT_NEAR(back.coords[j], v[j], 1e-9);
    }
  }
}

TEST(ClampIntoBall, Rules) {
  const auto inside = clamp_into_ball(Vector{0.3, -0.2}, Curvature(1.0));
  EXPECT_EQ(inside.vector(), (Vector{0.3, -0.2}));
  const auto zero = clamp_into_ball(Vector{0.0, 0.0}, Curvature(1.0));
  EXPECT_EQ(zero.vector(), (Vector{0.0, 0.0}));
  const auto outside = clamp_into_ball(Vector{2.0, 0.0}, Curvature(1.0), 1e-5);
  EXPECT_NEAR(norm(outside.coords()), 0.99999, 1e-15);
}
