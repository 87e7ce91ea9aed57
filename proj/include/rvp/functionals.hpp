#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "rvp/csv.hpp"
#include "rvp/cutoffs.hpp"
#include "rvp/kinematics.hpp"
#include "rvp/particle.hpp"
#include "rvp/reduce.hpp"

// Ensemble functionals tracked by the diagnostics engine. All sums are
// deterministic block reductions.

namespace rvp {

// M_n = sum w (1 + |v|)^n.
inline double moment(const Ensemble& e, double n, int threads = 1) {
  return indexed_sum(e.size(), threads, [&](std::size_t i) {
    return e.p[i].w * std::pow(1.0 + norm(e.p[i].v), n);
  });
}

// Conserved kinetic part, sum w sqrt(1 + |v|^2).
inline double kinetic_energy(const Ensemble& e, int threads = 1) {
  return indexed_sum(e.size(), threads, [&](std::size_t i) {
    return e.p[i].w * gamma_of(e.p[i].v);
  });
}

// Companion column using |v| in place of sqrt(1 + |v|^2).
inline double kinetic_energy_vnorm(const Ensemble& e, int threads = 1) {
  return indexed_sum(e.size(), threads, [&](std::size_t i) {
    return e.p[i].w * norm(e.p[i].v);
  });
}

// One time-slab increment of the spacetime functional
//   A(t) = int_0^t sum w |v_planar|^(2+2e*) / ((|x_planar| + d0)^(1-2e*) <v>).
// d0 regularizes the axis; the caller accumulates increments per step.
inline double weighted_spacetime_increment(const Ensemble& e, double eps_star, double delta0,
                                           double dt, int threads = 1) {
  const double pv = 2.0 + 2.0 * eps_star;
  const double px = 1.0 - 2.0 * eps_star;
  return dt * indexed_sum(e.size(), threads, [&](std::size_t i) {
    const double vp = std::hypot(e.p[i].v.x, e.p[i].v.y);
    const double xp = planar_radius(e.p[i].x) + delta0;
    return e.p[i].w * std::pow(vp, pv) / (std::pow(xp, px) * gamma_of(e.p[i].v));
  });
}

// J = sum w |l|^(-13) with a smooth floor cutoff: particles with
// |l| <= 0.625 * floor contribute zero, the transition follows psi_tilde.
inline double inverse_angular_momentum_moment(const Ensemble& e, double floor_ell,
                                              int threads = 1) {
  return indexed_sum(e.size(), threads, [&](std::size_t i) {
    const double la = std::abs(planar_angular_momentum(e.p[i].x, e.p[i].v));
    const double c = 1.0 - psi_tilde(2.0 * la / floor_ell);
    if (c == 0.0) return 0.0;
    return e.p[i].w * c * std::pow(la, -13.0);
  });
}

// log2 of the enlarged moment (1+t)^(nc^2) + sup_{s<=t} M_nc(s), evaluated in
// log space because the first term overflows a double for modest t.
inline double log2_enlarged_moment(double nc, double t, double sup_moment_nc) {
  const double a = nc * nc * std::log2(1.0 + t);
  const double b = std::log2(std::max(sup_moment_nc, 1e-300));
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

// Dyadic moment scale: smallest nonnegative integer k with
// 2^k >= (enlarged moment)^(1/(nc-1)).
inline int moment_scale(double nc, double t, double sup_moment_nc) {
  const double need = log2_enlarged_moment(nc, t, sup_moment_nc) / (nc - 1.0);
  const int k = static_cast<int>(std::ceil(need));
  return std::max(k, 0);
}

// beta: dyadic speed exponent of the running speed supremum, relative to M_t.
inline double beta_exponent(double sup_speed, int m_t) {
  if (m_t <= 0) return 0.0;
  return std::log2(std::max(1.0, sup_speed)) / static_cast<double>(m_t);
}

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  double field = 0.0;
  double total = 0.0;
  std::vector<double> moments;
  double a_cum = 0.0;
  double j_inv = 0.0;
  double max_speed = 0.0;
  double min_planar_radius = 0.0;
  double beta = 0.0;
  double kinetic_vnorm = 0.0;
};

struct DiagnosticsSeries {
  std::vector<double> moment_orders;
  std::vector<DiagnosticsRecord> rec;

  std::string header() const {
    std::string h = "t,mass,kinetic_energy,field_energy,total_energy";
    for (double n : moment_orders) h += ",moment_" + fmtg(n);
    h += ",A_cum,J,max_speed,min_planar_radius,beta,kinetic_energy_vnorm";
    return h;
  }

  static std::string row(const DiagnosticsRecord& r) {
    std::string s = fmt17(r.t) + ',' + fmt17(r.mass) + ',' + fmt17(r.kinetic) + ',' +
                    fmt17(r.field) + ',' + fmt17(r.total);
    for (double m : r.moments) s += ',' + fmt17(m);
    s += ',' + fmt17(r.a_cum) + ',' + fmt17(r.j_inv) + ',' + fmt17(r.max_speed) + ',' +
         fmt17(r.min_planar_radius) + ',' + fmt17(r.beta) + ',' + fmt17(r.kinetic_vnorm);
    return s;
  }

  void write_csv(std::ostream& os) const {
    os << header() << '\n';
    for (const auto& r : rec) os << row(r) << '\n';
  }
};

}  // namespace rvp
