#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "rvp/direct_sum.hpp"
#include "rvp/grid.hpp"
#include "rvp/poisson.hpp"
#include "rvp/radial_profile.hpp"
#include "rvp/rng.hpp"
#include "rvp/scenario.hpp"

namespace {

using rvp::Ensemble;
using rvp::FieldGrid;
using rvp::GridSpec;
using rvp::Vec3;

Ensemble single(const Vec3& x, double w) {
  Ensemble e;
  e.p.push_back({x, {0, 0, 0}, w, 1.0});
  e.freeze_initial();
  return e;
}

TEST(GridSpec, CenteredCube) {
  const GridSpec s = GridSpec::centered_cube(33, 4.0);
  EXPECT_EQ(s.nx, 33u);
  EXPECT_EQ(s.origin.x, -4.0);
  EXPECT_EQ(s.node(0, 0, 0).x, -4.0);
  EXPECT_NEAR(s.node(32, 0, 0).x, 4.0, 1e-15);
  EXPECT_NEAR(s.node(16, 16, 16).z, 0.0, 1e-15);
}

TEST(GridDeposit, ConservesMassAndSplitsTrilinearly) {
  FieldGrid g;
  g.spec = GridSpec::centered_cube(17, 2.0);
  const double h = g.spec.spacing.x;

  // On a node: all charge in one cell.
  rvp::grid_deposit(g, single(g.spec.node(8, 8, 8), 3.0));
  EXPECT_EQ(g.deposited_mass, 3.0);
  EXPECT_EQ(g.out_of_box_mass, 0.0);
  double cellsum = 0.0;
  for (double r : g.rho) cellsum += r;
  EXPECT_NEAR(cellsum * g.spec.cell_volume(), 3.0, 1e-12);
  EXPECT_NEAR(g.rho[g.idx(8, 8, 8)], 3.0 / g.spec.cell_volume(), 1e-12);

  // Off-node: split across the 8 corners with trilinear weights.
  const Vec3 x = g.spec.node(4, 5, 6) + Vec3{0.25 * h, 0.5 * h, 0.75 * h};
  rvp::grid_deposit(g, single(x, 1.0));
  const double q = 1.0 / g.spec.cell_volume();
  EXPECT_NEAR(g.rho[g.idx(4, 5, 6)], q * 0.75 * 0.5 * 0.25, 1e-12);
  EXPECT_NEAR(g.rho[g.idx(5, 6, 7)], q * 0.25 * 0.5 * 0.75, 1e-12);
  EXPECT_NEAR(g.rho[g.idx(5, 5, 6)], q * 0.25 * 0.5 * 0.25, 1e-12);

  // Outside the box: counted but not deposited.
  rvp::grid_deposit(g, single({10, 0, 0}, 0.5));
  EXPECT_EQ(g.deposited_mass, 0.5 * 0.0);
  EXPECT_EQ(g.out_of_box_mass, 0.5);
  EXPECT_EQ(g.monopole_mass(), 0.5);
}

TEST(GridPoisson, PointChargeField) {
  FieldGrid g;
  g.spec = GridSpec::centered_cube(64, 4.0);
  rvp::grid_deposit(g, single({0.0317, -0.021, 0.011}, 1.0));  // off-node on purpose
  rvp::grid_poisson_solve(g);
  rvp::Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double r = 1.5 + 1.2 * rng.uniform();
    const Vec3 x = r * rng.unit_sphere();
    const Vec3 E = rvp::grid_interpolate(g, x);
    const double ref = 1.0 / (4.0 * M_PI * norm2(x));
    worst = std::max(worst, std::abs(norm(E) - ref) / ref);
    // Outward.
    EXPECT_GT(dot(E, x), 0.0);
  }
  // Second-order stencil plus trilinear gather at h ~ 0.127.
  EXPECT_LT(worst, 5e-2);
}

TEST(GridPoisson, MatchesDirectSumOnGaussianCloud) {
  rvp::Scenario s;
  const Ensemble e = s.sample(20000, 88);
  FieldGrid g;
  g.spec = GridSpec::centered_cube(64, 6.0);
  rvp::grid_deposit(g, e);
  rvp::grid_poisson_solve(g);
  double rsup = 0.0;
  for (const auto& pt : e.p) rsup = std::max(rsup, norm(pt.x));
  rvp::Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const double r = std::min((0.9 + 0.7 * rng.uniform()) * rsup, 5.9);
    const Vec3 x = r * rng.unit_sphere();
    const Vec3 a = rvp::grid_interpolate(g, x);
    const Vec3 b = rvp::direct_sum_field(e, x, 0.05);
    worst = std::max(worst, norm(a - b) / std::max(norm(b), 1e-300));
  }
  EXPECT_LT(worst, 2e-2);
}

TEST(GridPoisson, MonopoleFallbackOutsideBox) {
  FieldGrid g;
  g.spec = GridSpec::centered_cube(32, 2.0);
  rvp::grid_deposit(g, single({0.1, 0, 0}, 2.0));
  rvp::grid_poisson_solve(g);
  const Vec3 x{0, 5.0, 0};
  const Vec3 E = rvp::grid_interpolate(g, x);
  EXPECT_NEAR(E.y, 2.0 / (4.0 * M_PI * 25.0), 1e-15);
  EXPECT_EQ(E.x, 0.0);
}

TEST(GridPoisson, CenteredGradientHasNoCurl) {
  // ex, ey, ez come from centered differences of one potential, so the
  // discrete mixed differences must agree to roundoff at interior nodes.
  rvp::Scenario s;
  const Ensemble e = s.sample(3000, 21);
  FieldGrid g;
  g.spec = GridSpec::centered_cube(32, 5.0);
  rvp::grid_deposit(g, e);
  rvp::grid_poisson_solve(g);
  const double hx = g.spec.spacing.x;
  double scale = 0.0;
  for (double v : g.ex) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < g.spec.nz; ++k)
    for (std::size_t j = 2; j + 2 < g.spec.ny; ++j)
      for (std::size_t i = 2; i + 2 < g.spec.nx; ++i) {
        const double dy_ex =
            (g.ex[g.idx(i, j + 1, k)] - g.ex[g.idx(i, j - 1, k)]) / (2.0 * hx);
        const double dx_ey =
            (g.ey[g.idx(i + 1, j, k)] - g.ey[g.idx(i - 1, j, k)]) / (2.0 * hx);
        const double dz_ey =
            (g.ey[g.idx(i, j, k + 1)] - g.ey[g.idx(i, j, k - 1)]) / (2.0 * hx);
        const double dy_ez =
            (g.ez[g.idx(i, j + 1, k)] - g.ez[g.idx(i, j - 1, k)]) / (2.0 * hx);
        worst = std::max(worst, std::abs(dy_ex - dx_ey));
        worst = std::max(worst, std::abs(dz_ey - dy_ez));
      }
  EXPECT_LT(worst, 1e-10 * std::max(scale / hx, 1.0));
}

TEST(GridPoisson, EnergyTracksRadialEstimate) {
  rvp::Scenario s;
  const Ensemble e = s.sample(20000, 301);
  FieldGrid g;
  g.spec = GridSpec::centered_cube(64, 6.0);
  rvp::grid_deposit(g, e);
  rvp::grid_poisson_solve(g);
  const double ge = rvp::grid_field_energy(g);
  const rvp::RadialProfile p = rvp::build_radial_profile(e, 2048, 16.0);
  const double re = rvp::radial_field_energy(p);
  EXPECT_GT(ge, 0.0);
  // The box misses the exterior tail; expect agreement at the tens-of-percent
  // level, enough to catch unit or sign mistakes.
  EXPECT_NEAR(ge, re, 0.35 * re);
}

TEST(GridSnapshot, HeaderAndPayload) {
  FieldGrid g;
  g.spec = GridSpec::centered_cube(8, 1.0);
  rvp::grid_deposit(g, single({0, 0, 0}, 1.0));
  rvp::grid_poisson_solve(g);
  const std::string path = ::testing::TempDir() + "snap_rho.bin";
  rvp::write_grid_snapshot(path, g, "rho");
  std::ifstream is(path, std::ios::binary);
  ASSERT_TRUE(is.good());
  std::string header;
  std::getline(is, header);
  EXPECT_NE(header.find("\"field\":\"rho\""), std::string::npos);
  EXPECT_NE(header.find("\"dims\":[8,8,8]"), std::string::npos);
  EXPECT_NE(header.find("\"dtype\":\"<f8\""), std::string::npos);
  std::vector<double> payload(8 * 8 * 8);
  is.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  ASSERT_TRUE(is.good());
  EXPECT_EQ(payload, g.rho);
  EXPECT_THROW(rvp::write_grid_snapshot(path, g, "vorticity"), std::invalid_argument);
  std::remove(path.c_str());
}

}  // namespace
