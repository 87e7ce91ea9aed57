#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rvp/cutoffs.hpp"
#include "rvp/vec3.hpp"

// Directional weight for the planar transport estimate:
//   omega_mu = (mu |v/||x/| (x/.v/) phi_{-10Mt}(mu c) + l^2)^{eps*} phi(mu(c+1/2)),
// with c = (x/.v/)/(|x/||v/|) and l = x1 v2 - x2 v1. Only the planar parts of
// x and v enter. The base is >= l^2 (the inner cutoff vanishes unless
// mu x/.v/ > 0), so the fractional power is real; value and gradient extend
// by 0 where the base or a planar norm vanishes.

namespace rvp {

struct WeightParams {
  int mu = +1;  // +1 or -1
  int Mt = 10;
  double eps_star = 0.005;
};

struct OmegaWeight {
  double value = 0.0;
  Vec3 grad_x{0.0, 0.0, 0.0};  // planar gradient, z component always 0
};

inline void validate_weight_params(const WeightParams& prm) {
  if (prm.mu != 1 && prm.mu != -1) throw std::invalid_argument("weight: mu must be +1 or -1");
  if (!(prm.eps_star > 0.0 && prm.eps_star < 0.5))
    throw std::invalid_argument("weight: eps_star must lie in (0, 1/2)");
}

inline OmegaWeight omega_weight(const Vec3& x, const Vec3& v, const WeightParams& prm) {
  validate_weight_params(prm);
  if (!std::isfinite(x.x) || !std::isfinite(x.y) || !std::isfinite(x.z) || !std::isfinite(v.x) ||
      !std::isfinite(v.y) || !std::isfinite(v.z))
    throw std::invalid_argument("weight: non-finite input");

  OmegaWeight out;
  const double mu = static_cast<double>(prm.mu);
  const double r2 = x.x * x.x + x.y * x.y;
  const double u2 = v.x * v.x + v.y * v.y;
  if (r2 == 0.0 || u2 == 0.0) return out;
  const double r = std::sqrt(r2);
  const double u = std::sqrt(u2);
  const double d = x.x * v.x + x.y * v.y;
  const double ell = x.x * v.y - x.y * v.x;
  const double c = d / (r * u);
  const int l = -10 * prm.Mt;

  const double phi_in = cutoff_phi_scaled(mu * c, l);
  const double dphi_in = cutoff_phi_scaled_deriv(mu * c, l);
  const double phi_out = cutoff_phi(mu * (c + 0.5));
  const double dphi_out = cutoff_phi_deriv(mu * (c + 0.5));

  const double base = mu * u * r * d * phi_in + ell * ell;
  if (base <= 0.0) return out;
  const double base_pow = std::pow(base, prm.eps_star);
  out.value = base_pow * phi_out;

  // grad c = v//(ru) - (x/.v/) x//(r^3 u)
  const double gcx = v.x / (r * u) - d * x.x / (r2 * r * u);
  const double gcy = v.y / (r * u) - d * x.y / (r2 * r * u);
  // grad base; the mu^2 = 1 on the inner-cutoff chain term is already folded in
  const double s = mu * u * phi_in;
  const double gBx = s * (d * x.x / r + r * v.x) + u * r * d * dphi_in * gcx + 2.0 * ell * v.y;
  const double gBy = s * (d * x.y / r + r * v.y) + u * r * d * dphi_in * gcy - 2.0 * ell * v.x;

  const double a = prm.eps_star * base_pow / base * phi_out;
  const double b = base_pow * dphi_out * mu;
  out.grad_x = Vec3{a * gBx + b * gcx, a * gBy + b * gcy, 0.0};
  return out;
}

struct WeightSample {
  Vec3 x, v;
};

struct PositivityReport {
  std::size_t samples = 0;
  std::size_t active = 0;  // both cutoffs nonzero: the estimate's natural domain
  double min_directional = std::numeric_limits<double>::infinity();  // mu v/.grad omega
  // Least ratio of mu v/.grad omega against
  // eps* |v/|^{1+2eps*} |x/|^{2eps*-1} phi_in phi_out over active samples;
  // scale-free, bounded below by 3^{eps*-1}.
  double fitted_constant = std::numeric_limits<double>::infinity();

  bool nonnegative(double tol = 1e-10) const {
    return samples == 0 || min_directional >= -tol;
  }
};

inline PositivityReport weight_positivity_check(const std::vector<WeightSample>& samples,
                                                const WeightParams& prm) {
  validate_weight_params(prm);
  PositivityReport rep;
  const double mu = static_cast<double>(prm.mu);
  for (const auto& smp : samples) {
    const OmegaWeight ow = omega_weight(smp.x, smp.v, prm);
    const double dir = mu * (smp.v.x * ow.grad_x.x + smp.v.y * ow.grad_x.y);
    ++rep.samples;
    rep.min_directional = std::min(rep.min_directional, dir);

    const double r = std::hypot(smp.x.x, smp.x.y);
    const double u = std::hypot(smp.v.x, smp.v.y);
    if (r == 0.0 || u == 0.0) continue;
    const double c = (smp.x.x * smp.v.x + smp.x.y * smp.v.y) / (r * u);
    const double phi_in = cutoff_phi_scaled(mu * c, -10 * prm.Mt);
    const double phi_out = cutoff_phi(mu * (c + 0.5));
    if (phi_in <= 0.0 || phi_out <= 0.0) continue;
    ++rep.active;
    const double ref = prm.eps_star * std::pow(u, 1.0 + 2.0 * prm.eps_star) *
                       std::pow(r, 2.0 * prm.eps_star - 1.0) * phi_in * phi_out;
    if (ref > 0.0) rep.fitted_constant = std::min(rep.fitted_constant, dir / ref);
  }
  return rep;
}

}  // namespace rvp
