#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "rvp/kinematics.hpp"
#include "rvp/quadrature.hpp"
#include "rvp/scenario.hpp"

namespace {

using rvp::Scenario;
using rvp::ScenarioKind;
using rvp::Vec3;

TEST(ScenarioKindNames, RoundTrip) {
  for (ScenarioKind k : {ScenarioKind::radial_gaussian, ScenarioKind::radial_shell,
                         ScenarioKind::cylindrical_torus,
                         ScenarioKind::cylindrical_vanishing_momentum}) {
    EXPECT_EQ(rvp::scenario_kind_from(rvp::to_string(k)), k);
  }
  EXPECT_THROW(rvp::scenario_kind_from("radial_gaussian"), std::invalid_argument);
  Scenario s;
  EXPECT_TRUE(s.is_radial());
  s.kind = ScenarioKind::cylindrical_torus;
  EXPECT_FALSE(s.is_radial());
}

TEST(VanishWeight, PinnedShape) {
  Scenario s;
  s.kind = ScenarioKind::cylindrical_vanishing_momentum;
  EXPECT_EQ(s.vanish_weight(0.0), 0.0);
  EXPECT_NEAR(s.vanish_weight(s.ell_ref), 0.5, 1e-15);
  EXPECT_NEAR(s.vanish_weight(-s.ell_ref), 0.5, 1e-15);
  EXPECT_GT(s.vanish_weight(2.0 * s.ell_ref), 0.99);
  EXPECT_LT(s.vanish_weight(0.5 * s.ell_ref), 1e-4);
  EXPECT_EQ(s.vanish_weight(0.3), s.vanish_weight(-0.3));
}

// Independent normalization oracle: tensor Gauss quadrature of the density over
// the radial reduction (x and v both isotropic for the radial families).
double radial_mass_quadrature(const Scenario& s, double r_hi) {
  const rvp::GaussRule rule = rvp::gauss_legendre(96);
  const double u_hi = std::min(s.v_max, 12.0 * s.sigma_v);
  double total = 0.0;
  const double pre = 16.0 * M_PI * M_PI;
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    const double r = 0.5 * r_hi * (rule.node[i] + 1.0);
    const double wr = 0.5 * r_hi * rule.weight[i];
    for (std::size_t j = 0; j < rule.node.size(); ++j) {
      const double u = 0.5 * u_hi * (rule.node[j] + 1.0);
      const double wu = 0.5 * u_hi * rule.weight[j];
      total += wr * wu * pre * r * r * u * u * s.density({r, 0, 0}, {u, 0, 0});
    }
  }
  return total;
}

TEST(ScenarioDensity, RadialGaussianNormalized) {
  Scenario s;
  s.mass = 2.5;
  EXPECT_NEAR(radial_mass_quadrature(s, 12.0 * s.sigma_x), s.mass, 1e-8 * s.mass);
}

TEST(ScenarioDensity, RadialShellNormalized) {
  Scenario s;
  s.kind = ScenarioKind::radial_shell;
  s.mass = 0.7;
  EXPECT_NEAR(radial_mass_quadrature(s, s.r0 + 14.0 * s.sigma_r), s.mass, 1e-8 * s.mass);
}

TEST(ScenarioDensity, TorusNormConsistent) {
  Scenario s;
  s.kind = ScenarioKind::cylindrical_torus;
  // Oracle: cylindrical quadrature of the documented shape
  // exp(-(rp-r0)^2/2sr^2) exp(-z^2/2sz^2) over rp in [0, r0+14 sr], z full line.
  const rvp::GaussRule rule = rvp::gauss_legendre(96);
  const double r_hi = s.r0 + 14.0 * s.sigma_r;
  const double ring = rvp::gauss_integrate(rule, 0.0, r_hi, [&](double r) {
    const double d = r - s.r0;
    return r * std::exp(-0.5 * d * d / (s.sigma_r * s.sigma_r));
  });
  const double axial = rvp::gauss_integrate(rule, -12.0 * s.sigma_z, 12.0 * s.sigma_z,
                                            [&](double z) {
                                              return std::exp(-0.5 * z * z /
                                                              (s.sigma_z * s.sigma_z));
                                            });
  // torus_norm carries the velocity normalization too.
  const double vel = 4.0 * M_PI *
                     rvp::gauss_integrate(rule, 0.0, std::min(s.v_max, 14.0 * s.sigma_v),
                                          [&](double u) {
                                            return u * u *
                                                   std::exp(-0.5 * u * u /
                                                            (s.sigma_v * s.sigma_v));
                                          });
  EXPECT_NEAR(s.torus_norm(), 2.0 * M_PI * ring * axial * vel, 1e-9 * s.torus_norm());
}

TEST(ScenarioDensity, TorusMassQuadrature) {
  Scenario s;
  s.kind = ScenarioKind::cylindrical_torus;
  s.mass = 1.3;
  // 3D tensor quadrature in (rp, z, u): velocity still isotropic here.
  const rvp::GaussRule rule = rvp::gauss_legendre(64);
  const double r_hi = s.r0 + 14.0 * s.sigma_r;
  const double z_hi = 12.0 * s.sigma_z;
  const double u_hi = std::min(s.v_max, 12.0 * s.sigma_v);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.node.size(); ++i) {
    const double r = 0.5 * r_hi * (rule.node[i] + 1.0);
    const double wr = 0.5 * r_hi * rule.weight[i];
    for (std::size_t j = 0; j < rule.node.size(); ++j) {
      const double z = z_hi * rule.node[j];
      const double wz = z_hi * rule.weight[j];
      for (std::size_t m = 0; m < rule.node.size(); ++m) {
        const double u = 0.5 * u_hi * (rule.node[m] + 1.0);
        const double wu = 0.5 * u_hi * rule.weight[m];
        total += wr * wz * wu * (2.0 * M_PI * r) * (4.0 * M_PI * u * u) *
                 s.density({r, 0, z}, {u, 0, 0});
      }
    }
  }
  EXPECT_NEAR(total, s.mass, 1e-7 * s.mass);
}

TEST(ScenarioDensity, VanishingIsReweightedTorus) {
  Scenario torus;
  torus.kind = ScenarioKind::cylindrical_torus;
  Scenario van = torus;
  van.kind = ScenarioKind::cylindrical_vanishing_momentum;
  const double scale = torus.torus_norm() / van.vanish_norm();
  rvp::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x{2.0 + rng.normal() * 0.3, rng.normal() * 0.3, rng.normal() * 0.2};
    const Vec3 v = rng.normal3();
    const double ft = torus.density(x, v);
    const double fv = van.density(x, v);
    const double expect = ft * scale * van.vanish_weight(rvp::planar_angular_momentum(x, v));
    EXPECT_NEAR(fv, expect, 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST(ScenarioDensity, VanishNormAgreesWithSampling) {
  // vanish_norm / torus_norm is the torus-average of the vanishing factor.
  Scenario torus;
  torus.kind = ScenarioKind::cylindrical_torus;
  Scenario van = torus;
  van.kind = ScenarioKind::cylindrical_vanishing_momentum;
  const std::size_t n = 200000;
  rvp::Ensemble e = torus.sample(n, 2024);
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = van.vanish_weight(e.ell0(i));
    acc += w;
    acc2 += w * w;
  }
  const double mean = acc / double(n);
  const double sd = std::sqrt(std::max(0.0, acc2 / double(n) - mean * mean) / double(n));
  const double expect = van.vanish_norm() / torus.torus_norm();
  EXPECT_NEAR(mean, expect, 5.0 * sd + 1e-6);
}

TEST(ScenarioDensity, EllBandMassAgreesWithSampling) {
  Scenario van;
  van.kind = ScenarioKind::cylindrical_vanishing_momentum;
  van.mass = 1.0;
  const std::size_t n = 200000;
  rvp::Ensemble e = van.sample(n, 515);
  const double bands[4][2] = {{0.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {2.0, 4.0}};
  for (const auto& b : bands) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l = std::abs(e.ell0(i));
      if (l >= b[0] && l < b[1]) ++hits;
    }
    const double frac = double(hits) / double(n);
    const double sd = std::sqrt(std::max(frac * (1.0 - frac), 1e-9) / double(n));
    const double expect = van.vanish_ell_band_mass(b[0], b[1]);
    EXPECT_NEAR(frac * van.mass, expect, 5.0 * sd * van.mass + 1e-4)
        << "band [" << b[0] << ", " << b[1] << ")";
  }
  // The full band recovers the total mass by construction of the reduction.
  EXPECT_NEAR(van.vanish_ell_band_mass(0.0, 1e9), van.mass, 1e-9);
}

TEST(ScenarioSample, FrozenStateAndWeights) {
  for (ScenarioKind k : {ScenarioKind::radial_gaussian, ScenarioKind::radial_shell,
                         ScenarioKind::cylindrical_torus,
                         ScenarioKind::cylindrical_vanishing_momentum}) {
    Scenario s;
    s.kind = k;
    s.mass = 1.75;
    const std::size_t n = 5000;
    rvp::Ensemble e = s.sample(n, 31);
    ASSERT_EQ(e.size(), n);
    EXPECT_EQ(e.target_mass, s.mass);
    EXPECT_NEAR(e.mass(), s.mass, 1e-12 * s.mass);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(e.p[i].w, s.mass / double(n));
      EXPECT_EQ(e.p[i].f0, s.density(e.p[i].x, e.p[i].v));
      EXPECT_GT(e.p[i].f0, 0.0);
      EXPECT_EQ(e.x0[i].x, e.p[i].x.x);
      EXPECT_EQ(e.v0[i].z, e.p[i].v.z);
      EXPECT_LE(norm(e.p[i].v), s.v_max);
    }
    rvp::Ensemble f = s.sample(n, 31);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_EQ(e.p[i].x.x, f.p[i].x.x);
      EXPECT_EQ(e.p[i].v.y, f.p[i].v.y);
    }
    rvp::Ensemble g = s.sample(n, 32);
    EXPECT_NE(e.p[0].x.x, g.p[0].x.x);
  }
}

TEST(ScenarioSample, RadialGaussianMoments) {
  Scenario s;
  const std::size_t n = 100000;
  rvp::Ensemble e = s.sample(n, 77);
  double vx = 0.0, vv = 0.0;
  Vec3 mx{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    mx += e.p[i].x;
    vx += norm2(e.p[i].x);
    vv += norm2(e.p[i].v);
  }
  EXPECT_LT(norm(mx) / double(n), 0.02);
  EXPECT_NEAR(vx / double(n), 3.0 * s.sigma_x * s.sigma_x, 0.05);
  EXPECT_NEAR(vv / double(n), 3.0 * s.sigma_v * s.sigma_v, 0.02);
}

TEST(ScenarioSample, ShellRadiusDistribution) {
  Scenario s;
  s.kind = ScenarioKind::radial_shell;
  const std::size_t n = 100000;
  rvp::Ensemble e = s.sample(n, 78);
  // Oracle mean radius under the r^2-weighted shell law.
  const rvp::GaussRule rule = rvp::gauss_legendre(96);
  const double r_hi = s.r0 + 14.0 * s.sigma_r;
  auto shell = [&](double r) {
    const double d = r - s.r0;
    return r * r * std::exp(-0.5 * d * d / (s.sigma_r * s.sigma_r));
  };
  const double z0 = rvp::gauss_integrate(rule, 0.0, r_hi, shell);
  const double z1 = rvp::gauss_integrate(rule, 0.0, r_hi, [&](double r) { return r * shell(r); });
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = norm(e.p[i].x);
    EXPECT_LE(r, r_hi + 1e-12);
    mean += r;
  }
  mean /= double(n);
  EXPECT_NEAR(mean, z1 / z0, 5.0 * s.sigma_r / std::sqrt(double(n)) + 1e-4);
}

TEST(ScenarioSample, TorusGeometry) {
  Scenario s;
  s.kind = ScenarioKind::cylindrical_torus;
  const std::size_t n = 100000;
  rvp::Ensemble e = s.sample(n, 79);
  const rvp::GaussRule rule = rvp::gauss_legendre(96);
  const double r_hi = s.r0 + 14.0 * s.sigma_r;
  auto ring = [&](double r) {
    const double d = r - s.r0;
    return r * std::exp(-0.5 * d * d / (s.sigma_r * s.sigma_r));
  };
  const double z0 = rvp::gauss_integrate(rule, 0.0, r_hi, ring);
  const double z1 = rvp::gauss_integrate(rule, 0.0, r_hi, [&](double r) { return r * ring(r); });
  double mean_rp = 0.0, mean_z = 0.0, var_z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_rp += rvp::planar_radius(e.p[i].x);
    mean_z += e.p[i].x.z;
    var_z += e.p[i].x.z * e.p[i].x.z;
  }
  mean_rp /= double(n);
  mean_z /= double(n);
  var_z /= double(n);
  EXPECT_NEAR(mean_rp, z1 / z0, 0.01);
  EXPECT_NEAR(mean_z, 0.0, 0.01);
  EXPECT_NEAR(var_z, s.sigma_z * s.sigma_z, 0.005);
}

}  // namespace
