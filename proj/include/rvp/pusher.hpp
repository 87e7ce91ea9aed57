#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "rvp/direct_sum.hpp"
#include "rvp/functionals.hpp"
#include "rvp/grid.hpp"
#include "rvp/kinematics.hpp"
#include "rvp/particle.hpp"
#include "rvp/poisson.hpp"
#include "rvp/radial_profile.hpp"
#include "rvp/reduce.hpp"

// Time integration. One step is kick-drift-kick:
//   v += (dt/2) E(x);  x += dt v/sqrt(1+|v|^2);  [rebuild];  v += (dt/2) E(x).
// The field is rebuilt from the post-drift positions every field_refresh
// steps and held in between; with field_refresh = 1 this is the standard
// second-order leapfrog for the self-consistent system. The rebuild cadence
// is counted on global step numbers so a resumed run retraces the original
// bit for bit.

namespace rvp {

struct RadialBackend {
  std::size_t bins = 2048;
  double r_max = 16.0;
  RadialProfile profile;

  void rebuild(const Ensemble& e) { profile = build_radial_profile(e, bins, r_max); }
  Vec3 eval(const Vec3& x) const { return radial_field(profile, x); }
  Vec3 eval_particle(std::size_t, const Vec3& x) const { return eval(x); }
  double field_energy(const Ensemble&, int) const { return radial_field_energy(profile); }
};

// Sums over a position snapshot taken at rebuild time, so kicks within a step
// see a frozen field. Self-interaction is excluded for ensemble particles.
struct DirectBackend {
  double softening = 1e-3;
  Ensemble snap;

  void rebuild(const Ensemble& e) { snap.p = e.p; }
  Vec3 eval(const Vec3& x) const { return direct_sum_field(snap, x, softening); }
  Vec3 eval_particle(std::size_t i, const Vec3& x) const {
    return direct_sum_field(snap, x, softening, i);
  }
  double field_energy(const Ensemble&, int threads) const {
    return pairwise_field_energy(snap, softening, threads);
  }
};

struct GridBackend {
  GridSpec spec;
  FieldGrid grid;

  void rebuild(const Ensemble& e) {
    grid.spec = spec;
    grid_deposit(grid, e);
    grid_poisson_solve(grid);
  }
  Vec3 eval(const Vec3& x) const { return grid_interpolate(grid, x); }
  Vec3 eval_particle(std::size_t, const Vec3& x) const { return eval(x); }
  double field_energy(const Ensemble&, int) const { return grid_field_energy(grid); }
};

// Fixed external field; for tests and decoupled transport studies.
template <class F>
struct AnalyticBackend {
  F field;
  void rebuild(const Ensemble&) {}
  Vec3 eval(const Vec3& x) const { return field(x); }
  Vec3 eval_particle(std::size_t, const Vec3& x) const { return field(x); }
  double field_energy(const Ensemble&, int) const { return 0.0; }
};

template <class F>
AnalyticBackend<F> make_analytic_backend(F f) {
  return AnalyticBackend<F>{std::move(f)};
}

struct TrajectoryPoint {
  std::uint64_t id = 0;
  double t = 0.0;
  Vec3 x, v, E;
};

struct TrajectoryLog {
  std::vector<std::uint64_t> ids;
  std::vector<TrajectoryPoint> points;  // time-major, ids in listed order

  static std::string header() { return "id,t,x1,x2,x3,v1,v2,v3,E1,E2,E3"; }

  static std::string row(const TrajectoryPoint& p) {
    return std::to_string(p.id) + ',' + fmt17(p.t) + ',' + fmt17(p.x.x) + ',' + fmt17(p.x.y) +
           ',' + fmt17(p.x.z) + ',' + fmt17(p.v.x) + ',' + fmt17(p.v.y) + ',' + fmt17(p.v.z) +
           ',' + fmt17(p.E.x) + ',' + fmt17(p.E.y) + ',' + fmt17(p.E.z);
  }

  void write_csv(std::ostream& os) const {
    os << header() << '\n';
    for (const auto& p : points) os << row(p) << '\n';
  }
};

struct IntegrateParams {
  double dt = 1e-3;
  double t_final = 1.0;
  std::uint64_t field_refresh = 1;
  std::uint64_t record_stride = 100;  // 0 disables diagnostics records
  std::uint64_t traj_stride = 1;
  std::vector<std::uint64_t> traj_ids;
  int threads = 1;

  std::vector<double> moment_orders{1.0, 2.0, 20.0};
  double nc = 20.0;        // surrogate top moment order for the dyadic scale
  double eps_star = 0.005;
  double delta0 = 1e-3;
  double j_floor = 1e-8;
  // Per-step decreases of (v.x)/|v| beyond coeff * dt^2 count as violations;
  // 0 disables the scan.
  double monotone_band_coeff = 0.0;

  // Resume support: global step/time origin and carried running values.
  // step_limit > 0 stops the segment early; forced end-of-run records still
  // fire only at the true horizon so segmented output concatenates cleanly.
  double t_origin = 0.0;
  std::uint64_t step_limit = 0;
  std::uint64_t step0 = 0;
  double a_cum0 = 0.0;
  double max_speed0 = 0.0;
  double min_planar_radius0 = std::numeric_limits<double>::infinity();
  double sup_moment_nc0 = 0.0;
};

struct IntegrateResult {
  TrajectoryLog traj;
  DiagnosticsSeries diag;
  std::uint64_t steps_done = 0;
  std::uint64_t monotone_violations = 0;
  double monotone_worst = 0.0;  // most negative per-step delta seen
  // Running values, carried into checkpoints.
  double a_cum = 0.0;
  double max_speed = 0.0;
  double min_planar_radius = std::numeric_limits<double>::infinity();
  double sup_moment_nc = 0.0;
};

template <class Backend>
void half_kick(Ensemble& e, const Backend& backend, double half_dt, int threads) {
  parallel_blocks(e.size(), threads, [&](std::size_t b0, std::size_t b1, std::size_t) {
    for (std::size_t i = b0; i < b1; ++i) {
      e.p[i].v += half_dt * backend.eval_particle(i, e.p[i].x);
    }
  });
}

inline void drift(Ensemble& e, double dt, int threads) {
  parallel_blocks(e.size(), threads, [&](std::size_t b0, std::size_t b1, std::size_t) {
    for (std::size_t i = b0; i < b1; ++i) {
      e.p[i].x += dt * relativistic_velocity(e.p[i].v);
    }
  });
}

// One leapfrog step; refresh_mid rebuilds the field from post-drift state
// before the closing half kick.
template <class Backend>
void push(Ensemble& e, Backend& backend, double dt, bool refresh_mid = true, int threads = 1) {
  half_kick(e, backend, 0.5 * dt, threads);
  drift(e, dt, threads);
  if (refresh_mid) backend.rebuild(e);
  half_kick(e, backend, 0.5 * dt, threads);
}

template <class Backend>
IntegrateResult integrate(Ensemble& e, Backend& backend, const IntegrateParams& prm) {
  if (prm.dt <= 0.0) throw std::invalid_argument("integrate: dt must be positive");
  const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(prm.t_final / prm.dt));
  if (prm.step0 > nsteps) throw std::invalid_argument("integrate: start step beyond horizon");
  const std::uint64_t last = prm.step_limit > 0 ? std::min(nsteps, prm.step_limit) : nsteps;
  const std::uint64_t refresh = std::max<std::uint64_t>(1, prm.field_refresh);

  IntegrateResult res;
  res.diag.moment_orders = prm.moment_orders;
  res.traj.ids = prm.traj_ids;
  res.a_cum = prm.a_cum0;
  res.max_speed = prm.max_speed0;
  res.min_planar_radius = prm.min_planar_radius0;
  res.sup_moment_nc = prm.sup_moment_nc0;

  const int threads = prm.threads;
  auto update_extremes = [&] {
    res.max_speed = std::max(
        res.max_speed, indexed_max(e.size(), threads, [&](std::size_t i) { return norm(e.p[i].v); }, 0.0));
    res.min_planar_radius = std::min(
        res.min_planar_radius,
        indexed_min(e.size(), threads, [&](std::size_t i) { return planar_radius(e.p[i].x); },
                    std::numeric_limits<double>::infinity()));
    res.sup_moment_nc = std::max(res.sup_moment_nc, moment(e, prm.nc, threads));
  };

  auto record = [&](double t) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = e.mass(threads);
    r.kinetic = kinetic_energy(e, threads);
    r.kinetic_vnorm = kinetic_energy_vnorm(e, threads);
    r.field = backend.field_energy(e, threads);
    r.total = r.kinetic + r.field;
    r.moments.reserve(prm.moment_orders.size());
    for (double n : prm.moment_orders) r.moments.push_back(moment(e, n, threads));
    r.a_cum = res.a_cum;
    r.j_inv = inverse_angular_momentum_moment(e, prm.j_floor, threads);
    r.max_speed = res.max_speed;
    r.min_planar_radius = res.min_planar_radius;
    const int mt = moment_scale(prm.nc, t, res.sup_moment_nc);
    r.beta = beta_exponent(res.max_speed, mt);
    res.diag.rec.push_back(std::move(r));
  };

  auto log_traj = [&](double t) {
    for (std::uint64_t id : res.traj.ids) {
      if (id >= e.size()) throw std::invalid_argument("integrate: trajectory id out of range");
      TrajectoryPoint p;
      p.id = id;
      p.t = t;
      p.x = e.p[id].x;
      p.v = e.p[id].v;
      p.E = backend.eval_particle(id, e.p[id].x);
      res.traj.points.push_back(p);
    }
  };

  auto check_finite = [&](std::uint64_t gs) {
    for (std::size_t i = 0; i < e.size(); ++i) {
      const Particle& p = e.p[i];
      if (std::isfinite(p.x.x) && std::isfinite(p.x.y) && std::isfinite(p.x.z) &&
          std::isfinite(p.v.x) && std::isfinite(p.v.y) && std::isfinite(p.v.z))
        continue;
      throw std::runtime_error("integration blowup: particle " + std::to_string(i) +
                               " non-finite after step " + std::to_string(gs));
    }
  };

  std::vector<double> q_old;
  const bool scan_monotone = prm.monotone_band_coeff > 0.0;
  const double band = prm.monotone_band_coeff * prm.dt * prm.dt;
  auto load_q = [&] {
    q_old.resize(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double vn = norm(e.p[i].v);
      q_old[i] = vn > 0.0 ? dot(e.p[i].v, e.p[i].x) / vn : std::numeric_limits<double>::quiet_NaN();
    }
  };

  backend.rebuild(e);
  update_extremes();
  if (prm.step0 == 0) {
    if (prm.record_stride > 0) record(prm.t_origin);
    if (!res.traj.ids.empty()) log_traj(prm.t_origin);
  }

  for (std::uint64_t gs = prm.step0 + 1; gs <= last; ++gs) {
    res.a_cum += weighted_spacetime_increment(e, prm.eps_star, prm.delta0, prm.dt, threads);
    if (scan_monotone) load_q();
    push(e, backend, prm.dt, gs % refresh == 0, threads);
    check_finite(gs);
    const double t = prm.t_origin + static_cast<double>(gs) * prm.dt;
    update_extremes();
    if (scan_monotone) {
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double vn = norm(e.p[i].v);
        if (!(vn > 0.0) || std::isnan(q_old[i])) continue;
        const double dq = dot(e.p[i].v, e.p[i].x) / vn - q_old[i];
        if (dq < -band) {
          ++res.monotone_violations;
          res.monotone_worst = std::min(res.monotone_worst, dq);
        }
      }
    }
    if (!res.traj.ids.empty() && (gs % prm.traj_stride == 0 || gs == nsteps)) log_traj(t);
    if (prm.record_stride > 0 && (gs % prm.record_stride == 0 || gs == nsteps)) {
      if (res.diag.rec.empty() || res.diag.rec.back().t != t) record(t);
    }
    res.steps_done = gs;
  }
  return res;
}

}  // namespace rvp
