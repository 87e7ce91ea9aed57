#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rvp/kinematics.hpp"
#include "rvp/quadrature.hpp"
#include "rvp/reduce.hpp"
#include "rvp/rng.hpp"
#include "rvp/vec3.hpp"

namespace {

using rvp::Vec3;

TEST(Kinematics, RelativisticVelocityFixedPoints) {
  const Vec3 z = rvp::relativistic_velocity({0, 0, 0});
  EXPECT_EQ(z.x, 0.0);
  EXPECT_EQ(z.y, 0.0);
  EXPECT_EQ(z.z, 0.0);

  const Vec3 a = rvp::relativistic_velocity({3, 0, 0});
  EXPECT_NEAR(a.x, 3.0 / std::sqrt(10.0), 1e-15);
  EXPECT_EQ(a.y, 0.0);

  const Vec3 big = rvp::relativistic_velocity({1e6, 0, 0});
  EXPECT_GT(norm(big), 0.999999);
  EXPECT_LT(norm(big), 1.0);
}

TEST(Kinematics, RelativisticVelocityOddAndSubluminal) {
  rvp::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = 10.0 * rng.normal3();
    const Vec3 p = rvp::relativistic_velocity(v);
    const Vec3 m = rvp::relativistic_velocity(-1.0 * v);
    EXPECT_EQ(p.x, -m.x);
    EXPECT_EQ(p.y, -m.y);
    EXPECT_EQ(p.z, -m.z);
    EXPECT_LT(norm(p), 1.0);
  }
  // Monotone along a ray.
  double prev = 0.0;
  for (double s = 0.5; s < 100.0; s *= 2.0) {
    const double n = norm(rvp::relativistic_velocity({s, s, s}));
    EXPECT_GT(n, prev);
    prev = n;
  }
}

TEST(Kinematics, PlanarAngularMomentumExamples) {
  EXPECT_EQ(rvp::planar_angular_momentum({1, 0, 0}, {0, 1, 0}), 1.0);
  EXPECT_EQ(rvp::planar_angular_momentum({1, 0, 5}, {2, 0, -3}), 0.0);
  EXPECT_NEAR(rvp::planar_angular_momentum({0.3, -0.4, 1}, {2, 1, 0}), 1.1, 1e-15);
}

TEST(Kinematics, PlanarAngularMomentumRotationInvariant) {
  rvp::Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x = rng.normal3();
    const Vec3 v = rng.normal3();
    const double th = 2.0 * M_PI * rng.uniform();
    const double c = std::cos(th), s = std::sin(th);
    const Vec3 xr{c * x.x - s * x.y, s * x.x + c * x.y, x.z};
    const Vec3 vr{c * v.x - s * v.y, s * v.x + c * v.y, v.z};
    EXPECT_NEAR(rvp::planar_angular_momentum(xr, vr), rvp::planar_angular_momentum(x, v), 1e-12);
  }
}

TEST(Kinematics, MonotoneQuantityExamples) {
  EXPECT_EQ(rvp::monotone_quantity({1, 0, 0}, {2, 0, 0}), 1.0);
  EXPECT_EQ(rvp::monotone_quantity({1, 0, 0}, {0, 5, 0}), 0.0);
  EXPECT_NEAR(rvp::monotone_quantity({1, 1, 0}, {3, -3, 0}), 0.0, 1e-15);
}

TEST(Kinematics, Gamma) {
  EXPECT_EQ(rvp::gamma_of({0, 0, 0}), 1.0);
  EXPECT_NEAR(rvp::gamma_of({3, 0, 0}), std::sqrt(10.0), 1e-15);
  EXPECT_EQ(rvp::planar_radius({3, 4, 7}), 5.0);
}

TEST(Rng, DeterministicAndSerializable) {
  rvp::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.uniform(), b.uniform());

  // Round-trip mid-stream with a cached normal variate pending.
  rvp::Rng c(7);
  c.normal();  // leaves the spare cached
  const std::string state = c.serialize();
  rvp::Rng d = rvp::Rng::deserialize(state);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(c.normal(), d.normal());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(c.uniform(), d.uniform());
}

TEST(Rng, DistributionSanity) {
  rvp::Rng rng(123);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal();
    s += g;
    s2 += g * g;
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(double(n)));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / double(n)));
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);

  // Sphere directions have unit norm and near-zero mean.
  Vec3 mean{0, 0, 0};
  for (int i = 0; i < 20000; ++i) {
    const Vec3 u = rng.unit_sphere();
    EXPECT_NEAR(norm(u), 1.0, 1e-12);
    mean += u;
  }
  EXPECT_LT(norm(mean) / 20000.0, 0.02);
}

TEST(Reduce, MatchesPlainSumAndThreadCountInvariant) {
  const std::size_t n = 100000;
  std::vector<double> vals(n);
  rvp::Rng rng(9);
  for (auto& v : vals) v = std::exp(20.0 * (rng.uniform() - 0.5));

  const double t1 = rvp::indexed_sum(n, 1, [&](std::size_t i) { return vals[i]; });
  const double t3 = rvp::indexed_sum(n, 3, [&](std::size_t i) { return vals[i]; });
  const double t8 = rvp::indexed_sum(n, 8, [&](std::size_t i) { return vals[i]; });
  EXPECT_EQ(t1, t3);
  EXPECT_EQ(t1, t8);

  long double ref = 0.0L;
  for (double v : vals) ref += static_cast<long double>(v);
  EXPECT_NEAR(t1, static_cast<double>(ref), 1e-9 * std::abs(static_cast<double>(ref)));
}

TEST(Reduce, CompensationSurvivesCancellation) {
  rvp::Kahan k;
  k.add(1e16);
  k.add(1.0);
  k.add(-1e16);
  EXPECT_EQ(k.get(), 1.0);
}

TEST(Reduce, MaxMinThreadInvariant) {
  const std::size_t n = 30000;
  std::vector<double> vals(n);
  rvp::Rng rng(31);
  for (auto& v : vals) v = rng.normal();
  const double m1 = rvp::indexed_max(n, 1, [&](std::size_t i) { return vals[i]; }, -1e300);
  const double m4 = rvp::indexed_max(n, 4, [&](std::size_t i) { return vals[i]; }, -1e300);
  EXPECT_EQ(m1, m4);
  const double lo1 = rvp::indexed_min(n, 1, [&](std::size_t i) { return vals[i]; }, 1e300);
  const double lo4 = rvp::indexed_min(n, 4, [&](std::size_t i) { return vals[i]; }, 1e300);
  EXPECT_EQ(lo1, lo4);
  EXPECT_LE(lo1, m1);
}

TEST(Quadrature, GaussLegendreExactness) {
  const rvp::GaussRule r16 = rvp::gauss_legendre(16);
  // Degree 2n-1 = 31 polynomials are integrated exactly.
  const double p10 = rvp::gauss_integrate(r16, 0.0, 2.0, [](double x) { return std::pow(x, 10); });
  EXPECT_NEAR(p10, std::pow(2.0, 11) / 11.0, 1e-12);
  const double s = rvp::gauss_integrate(r16, 0.0, M_PI, [](double x) { return std::sin(x); });
  EXPECT_NEAR(s, 2.0, 1e-12);
  const rvp::GaussRule r96 = rvp::gauss_legendre(96);
  const double g = rvp::gauss_integrate(r96, -8.0, 8.0,
                                        [](double x) { return std::exp(-0.5 * x * x); });
  EXPECT_NEAR(g, std::sqrt(2.0 * M_PI), 1e-12);
}

}  // namespace
