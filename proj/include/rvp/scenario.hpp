#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "rvp/kinematics.hpp"
#include "rvp/particle.hpp"
#include "rvp/quadrature.hpp"
#include "rvp/rng.hpp"

// Initial data families. Every scenario has a closed-form phase-space density
// f0 normalized so that its integral is `mass`, and a sampler that draws from
// exactly that law with uniform weights w = mass/n. Momenta are truncated to
// |v| <= v_max; the truncation enters the normalization through the radial
// Gaussian integral, so f0 stays exact.
//
// The radial families depend on (|x|, |v|) only. The cylindrical families are
// invariant under simultaneous rotation of the planar components of x and v.
// The vanishing-momentum family multiplies the torus law by
// g(l) = |l|^p / (l_ref^p + |l|^p), l = x1 v2 - x2 v1, which suppresses small
// planar angular momentum at order p; its normalization has no closed form and
// is computed once by Gauss-Legendre quadrature.

namespace rvp {

enum class ScenarioKind {
  radial_gaussian,
  radial_shell,
  cylindrical_torus,
  cylindrical_vanishing_momentum,
};

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::radial_gaussian: return "radial-gaussian";
    case ScenarioKind::radial_shell: return "radial-shell";
    case ScenarioKind::cylindrical_torus: return "cylindrical-torus";
    case ScenarioKind::cylindrical_vanishing_momentum: return "cylindrical-vanishing-momentum";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from(const std::string& s) {
  if (s == "radial-gaussian") return ScenarioKind::radial_gaussian;
  if (s == "radial-shell") return ScenarioKind::radial_shell;
  if (s == "cylindrical-torus") return ScenarioKind::cylindrical_torus;
  if (s == "cylindrical-vanishing-momentum") return ScenarioKind::cylindrical_vanishing_momentum;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

namespace detail {

// Mass of the isotropic Gaussian inside |v| <= R (Maxwell CDF), times the
// full-space normalizer.
inline double trunc_gauss3(double sigma, double vmax) {
  const double R = vmax / sigma;
  const double cdf = std::erf(R / std::sqrt(2.0)) - std::sqrt(2.0 / M_PI) * R * std::exp(-0.5 * R * R);
  return std::pow(2.0 * M_PI * sigma * sigma, 1.5) * cdf;
}

inline double gauss1(double sigma) { return std::sqrt(2.0 * M_PI) * sigma; }

// Antiderivatives for int r^k exp(-(r-r0)^2 / (2 s^2)) dr, k = 1, 2, in the
// variable u = (r - r0)/(s sqrt 2). Used for shell/ring normalization and for
// inverse-CDF radius sampling.
inline double radial_anti1(double r0, double s, double u) {
  const double q = s * std::sqrt(2.0);
  return q * (r0 * 0.5 * std::sqrt(M_PI) * std::erf(u) - q * 0.5 * std::exp(-u * u));
}

inline double radial_anti2(double r0, double s, double u) {
  const double q = s * std::sqrt(2.0);
  const double e = std::exp(-u * u);
  const double erfu = std::erf(u);
  return q * (r0 * r0 * 0.5 * std::sqrt(M_PI) * erfu - q * r0 * e +
              q * q * 0.5 * (-u * e * 0.5 + 0.25 * std::sqrt(M_PI) * erfu) * 2.0);
}

inline double radial_integral(int k, double r0, double s, double rlo, double rhi) {
  const double ulo = (rlo - r0) / (s * std::sqrt(2.0));
  const double uhi = (rhi - r0) / (s * std::sqrt(2.0));
  return k == 1 ? radial_anti1(r0, s, uhi) - radial_anti1(r0, s, ulo)
                : radial_anti2(r0, s, uhi) - radial_anti2(r0, s, ulo);
}

}  // namespace detail

struct Scenario {
  ScenarioKind kind = ScenarioKind::radial_gaussian;
  double mass = 1.0;
  double v_max = 50.0;
  double sigma_v = 0.5;
  // radial-gaussian
  double sigma_x = 1.0;
  // radial-shell / cylindrical ring
  double r0 = 2.0;
  double sigma_r = 0.2;
  // cylindrical
  double sigma_z = 0.2;
  // vanishing momentum
  double vanish_p = 14.0;
  double ell_ref = 0.5;

  bool is_radial() const {
    return kind == ScenarioKind::radial_gaussian || kind == ScenarioKind::radial_shell;
  }

  double vanish_weight(double ell) const {
    const double a = std::pow(std::abs(ell), vanish_p);
    return a / (std::pow(ell_ref, vanish_p) + a);
  }

  // Phase-space density, integral over (x, v) equals `mass`.
  double density(const Vec3& x, const Vec3& v) const {
    const double vn = norm(v);
    if (vn > v_max) return 0.0;
    const double gv = std::exp(-0.5 * norm2(v) / (sigma_v * sigma_v));
    switch (kind) {
      case ScenarioKind::radial_gaussian: {
        const double gx = std::exp(-0.5 * norm2(x) / (sigma_x * sigma_x));
        const double zx = std::pow(2.0 * M_PI * sigma_x * sigma_x, 1.5);
        return mass / (zx * detail::trunc_gauss3(sigma_v, v_max)) * gx * gv;
      }
      case ScenarioKind::radial_shell: {
        const double d = norm(x) - r0;
        const double gx = std::exp(-0.5 * d * d / (sigma_r * sigma_r));
        const double zx = 4.0 * M_PI * detail::radial_integral(2, r0, sigma_r, 0.0, r0 + 14.0 * sigma_r);
        return mass / (zx * detail::trunc_gauss3(sigma_v, v_max)) * gx * gv;
      }
      case ScenarioKind::cylindrical_torus: {
        return mass / torus_norm() * torus_shape(x) * gv;
      }
      case ScenarioKind::cylindrical_vanishing_momentum: {
        return mass / vanish_norm() * torus_shape(x) * gv *
               vanish_weight(planar_angular_momentum(x, v));
      }
    }
    return 0.0;
  }

  Ensemble sample(std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    Ensemble e;
    e.target_mass = mass;
    e.p.resize(n);
    const double w = mass / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      Particle& pt = e.p[i];
      switch (kind) {
        case ScenarioKind::radial_gaussian:
          pt.x = sigma_x * rng.normal3();
          pt.v = draw_velocity(rng);
          break;
        case ScenarioKind::radial_shell: {
          const double r = invert_radial_cdf(2, rng.uniform());
          pt.x = r * rng.unit_sphere();
          pt.v = draw_velocity(rng);
          break;
        }
        case ScenarioKind::cylindrical_torus:
          draw_torus(rng, pt.x);
          pt.v = draw_velocity(rng);
          break;
        case ScenarioKind::cylindrical_vanishing_momentum:
          // Exact rejection against the torus proposal; g <= 1.
          for (;;) {
            draw_torus(rng, pt.x);
            pt.v = draw_velocity(rng);
            if (rng.uniform() < vanish_weight(planar_angular_momentum(pt.x, pt.v))) break;
          }
          break;
      }
      pt.w = w;
      pt.f0 = density(pt.x, pt.v);
    }
    e.freeze_initial();
    return e;
  }

  // Normalization of the torus spatial-velocity law without the vanishing
  // factor. Closed form.
  double torus_norm() const {
    const double zr = 2.0 * M_PI * detail::radial_integral(1, r0, sigma_r, 0.0, r0 + 14.0 * sigma_r);
    return zr * detail::gauss1(sigma_z) * detail::trunc_gauss3(sigma_v, v_max);
  }

  // Normalization with the vanishing factor; 3d Gauss-Legendre over
  // (planar radius, planar speed, relative angle), the axial and v3 factors
  // reduced to erf. Cached after the first call.
  double vanish_norm() const {
    if (vanish_norm_cache_ > 0.0) return vanish_norm_cache_;
    const GaussRule rule = gauss_legendre(96);
    const double rlo = std::max(0.0, r0 - 14.0 * sigma_r);
    const double rhi = r0 + 14.0 * sigma_r;
    const double uhi = std::min(v_max, 14.0 * sigma_v);
    const double sv2 = sigma_v * std::sqrt(2.0);
    double z = gauss_integrate(rule, rlo, rhi, [&](double r) {
      const double fr = r * std::exp(-0.5 * (r - r0) * (r - r0) / (sigma_r * sigma_r));
      return fr * gauss_integrate(rule, 0.0, uhi, [&](double u) {
        const double fu = u * std::exp(-0.5 * u * u / (sigma_v * sigma_v));
        const double b = std::sqrt(std::max(0.0, v_max * v_max - u * u));
        const double zv3 = detail::gauss1(sigma_v) * std::erf(b / sv2);
        const double ang = gauss_integrate(rule, 0.0, 0.5 * M_PI, [&](double a) {
          return vanish_weight(r * u * std::sin(a));
        });
        return fu * zv3 * 4.0 * ang;
      });
    });
    z *= 2.0 * M_PI * detail::gauss1(sigma_z);
    vanish_norm_cache_ = z;
    return z;
  }

  // Expected mass with |l| in [a, b], by the same reduction as vanish_norm.
  // Oracle for histogram tests against the sampler.
  double vanish_ell_band_mass(double a, double b) const {
    const GaussRule rule = gauss_legendre(96);
    const double rlo = std::max(0.0, r0 - 14.0 * sigma_r);
    const double rhi = r0 + 14.0 * sigma_r;
    const double uhi = std::min(v_max, 14.0 * sigma_v);
    const double sv2 = sigma_v * std::sqrt(2.0);
    double z = gauss_integrate(rule, rlo, rhi, [&](double r) {
      const double fr = r * std::exp(-0.5 * (r - r0) * (r - r0) / (sigma_r * sigma_r));
      return fr * gauss_integrate(rule, 0.0, uhi, [&](double u) {
        const double ru = r * u;
        const double alo = std::asin(std::min(1.0, a / ru));
        const double ahi = std::asin(std::min(1.0, b / ru));
        if (alo >= ahi) return 0.0;
        const double fu = u * std::exp(-0.5 * u * u / (sigma_v * sigma_v));
        const double bb = std::sqrt(std::max(0.0, v_max * v_max - u * u));
        const double zv3 = detail::gauss1(sigma_v) * std::erf(bb / sv2);
        const double ang = gauss_integrate(rule, alo, ahi, [&](double al) {
          return vanish_weight(ru * std::sin(al));
        });
        return fu * zv3 * 4.0 * ang;
      });
    });
    z *= 2.0 * M_PI * detail::gauss1(sigma_z);
    return mass * z / vanish_norm();
  }

 private:
  mutable double vanish_norm_cache_ = 0.0;

  double torus_shape(const Vec3& x) const {
    const double d = planar_radius(x) - r0;
    return std::exp(-0.5 * d * d / (sigma_r * sigma_r)) *
           std::exp(-0.5 * x.z * x.z / (sigma_z * sigma_z));
  }

  Vec3 draw_velocity(Rng& rng) const {
    for (;;) {
      const Vec3 v = sigma_v * rng.normal3();
      if (norm(v) <= v_max) return v;
    }
  }

  void draw_torus(Rng& rng, Vec3& x) const {
    const double rr = invert_radial_cdf(1, rng.uniform());
    const double ang = 2.0 * M_PI * rng.uniform();
    x = {rr * std::cos(ang), rr * std::sin(ang), sigma_z * rng.normal()};
  }

  // Radius with density proportional to r^k exp(-(r-r0)^2/(2 sigma^2)) on
  // (0, rmax), rmax far enough out that the dropped tail is below double
  // precision. Bisection on the closed-form CDF.
  double invert_radial_cdf(int k, double u) const {
    const double s = sigma_r;
    const double rmax = r0 + 14.0 * s;
    const double total = detail::radial_integral(k, r0, s, 0.0, rmax);
    double lo = 0.0, hi = rmax;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (detail::radial_integral(k, r0, s, 0.0, mid) < u * total) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace rvp
