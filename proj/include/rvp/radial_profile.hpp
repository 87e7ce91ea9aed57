#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rvp/particle.hpp"
#include "rvp/vec3.hpp"

// Spherically averaged field. For radial data the field is
//   E(x) = (m(|x|) / (4 pi |x|^2)) x-hat,
// m(r) the mass inside radius r. The profile bins radii on a uniform grid and
// interpolates the cumulative mass linearly, which smears each particle
// uniformly across its bin. Queries beyond the last edge see the full mass,
// so the pointwise bound |E| <= M_total / (4 pi |x|^2) holds everywhere.

namespace rvp {

struct RadialProfile {
  double r_max = 0.0;
  std::vector<double> shell_mass;  // bin b covers [b h, (b+1) h), h = r_max / bins
  std::vector<double> cumulative;  // cumulative[b] = mass with |x| < (b+1) h
  double overflow_mass = 0.0;      // particles beyond r_max

  double bin_width() const { return r_max / static_cast<double>(shell_mass.size()); }
  double total_mass() const {
    return (cumulative.empty() ? 0.0 : cumulative.back()) + overflow_mass;
  }

  // Piecewise-linear interior mass, m(0) = 0, m(r >= r_max) = total.
  double interior_mass(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= r_max) return total_mass();
    const double h = bin_width();
    const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(r / h),
                                                shell_mass.size() - 1);
    const double lo = b == 0 ? 0.0 : cumulative[b - 1];
    const double frac = (r - static_cast<double>(b) * h) / h;
    return lo + (cumulative[b] - lo) * frac;
  }
};

inline RadialProfile build_radial_profile(const Ensemble& e, std::size_t bins, double r_max) {
  if (bins == 0 || r_max <= 0.0) throw std::invalid_argument("radial profile needs bins > 0, r_max > 0");
  RadialProfile p;
  p.r_max = r_max;
  p.shell_mass.assign(bins, 0.0);
  const double inv_h = static_cast<double>(bins) / r_max;
  Kahan overflow;
  for (const Particle& pt : e.p) {
    const double r = norm(pt.x);
    if (r >= r_max) {
      overflow.add(pt.w);
      continue;
    }
    p.shell_mass[static_cast<std::size_t>(r * inv_h)] += pt.w;
  }
  p.overflow_mass = overflow.get();
  p.cumulative.resize(bins);
  Kahan cum;
  for (std::size_t b = 0; b < bins; ++b) {
    cum.add(p.shell_mass[b]);
    p.cumulative[b] = cum.get();
  }
  return p;
}

// Outward field of the profile; zero at the origin.
inline Vec3 radial_field(const RadialProfile& p, const Vec3& x) {
  const double r = norm(x);
  if (r == 0.0) return {};
  const double m = p.interior_mass(r);
  return x * (m / (4.0 * M_PI * r * r * r));
}

// (1/2) int |E|^2 over all space. With m piecewise linear the integral is
// analytic per bin; the exterior tail contributes M^2 / (8 pi r_max).
inline double radial_field_energy(const RadialProfile& p) {
  // int (a + b s)^2 / s^2 ds over the bin, s the radius offset from zero.
  const double h = p.bin_width();
  Kahan sum;
  double m_lo = 0.0;
  for (std::size_t b = 0; b < p.shell_mass.size(); ++b) {
    const double r_lo = static_cast<double>(b) * h;
    const double r_hi = r_lo + h;
    const double m_hi = p.cumulative[b];
    // m(r) = m_lo + (m_hi - m_lo) (r - r_lo)/h = a + c r on [r_lo, r_hi]
    const double c = (m_hi - m_lo) / h;
    const double a = m_lo - c * r_lo;
    double piece;
    if (b == 0) {
      // a = 0 exactly in the first bin (m(0) = 0): int c^2 dr
      piece = c * c * h;
    } else {
      piece = a * a * (1.0 / r_lo - 1.0 / r_hi) + 2.0 * a * c * std::log(r_hi / r_lo) +
              c * c * (r_hi - r_lo);
    }
    sum.add(piece);
    m_lo = m_hi;
  }
  const double M = p.total_mass();
  sum.add(M * M / p.r_max);
  return sum.get() / (8.0 * M_PI);
}

}  // namespace rvp
