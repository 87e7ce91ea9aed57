#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rvp/checkpoint.hpp"
#include "rvp/config.hpp"
#include "rvp/functionals.hpp"
#include "rvp/localized.hpp"
#include "rvp/majority.hpp"
#include "rvp/pusher.hpp"
#include "rvp/rng.hpp"
#include "rvp/scenario.hpp"
#include "rvp/weight.hpp"

// Orchestration: config -> scenario -> backend -> integrate -> artifacts.
// One run owns one fresh output directory. Every CSV byte is a function of
// (config, seed); the manifest alone carries wall-clock data.

namespace rvp {

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw std::runtime_error("short write: " + path);
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void append_diag_rows(std::string& text, const DiagnosticsSeries& s) {
  for (const auto& r : s.rec) text += DiagnosticsSeries::row(r) + "\n";
}

inline void append_traj_rows(std::string& text, const TrajectoryLog& t) {
  for (const auto& p : t.points) text += TrajectoryLog::row(p) + "\n";
}

inline IntegrateParams integrate_params(const RunConfig& cfg) {
  IntegrateParams prm;
  prm.dt = cfg.dt;
  prm.t_final = cfg.t_end;
  prm.field_refresh = cfg.field_refresh;
  prm.record_stride = cfg.record_interval;
  prm.traj_stride = cfg.traj_stride;
  for (std::uint64_t i = 0; i < cfg.traj_count; ++i) prm.traj_ids.push_back(i);
  prm.threads = cfg.threads;
  prm.moment_orders = cfg.moments;
  prm.nc = cfg.nc;
  prm.eps_star = cfg.eps_star;
  prm.delta0 = cfg.delta0;
  prm.j_floor = cfg.j_floor;
  prm.monotone_band_coeff = cfg.monotone_band;
  return prm;
}

template <class F>
auto with_backend(const RunConfig& cfg, F&& f) {
  if (cfg.backend == "radial") {
    RadialBackend b;
    b.bins = cfg.radial_bins;
    b.r_max = cfg.radial_rmax;
    return f(b);
  }
  if (cfg.backend == "direct") {
    DirectBackend b;
    b.softening = cfg.softening;
    return f(b);
  }
  GridBackend b;
  b.spec = GridSpec::centered_cube(cfg.grid_n, cfg.grid_half);
  return f(b);
}

}  // namespace detail

// Localized-field bound verification over the (k, j1, j2) lattice at the
// current ensemble state; returns the JSON report plus a summary CSV.
inline void run_localization_suite(const RunConfig& cfg, const Ensemble& e, double t_now,
                                   double sup_moment_nc, const std::string& json_path,
                                   const std::string& csv_path) {
  const GridSpec spec = GridSpec::centered_cube(cfg.loc_grid_n, cfg.loc_grid_half);
  const ShellBand band = resolvable_shells(spec);
  const int k_lo = cfg.loc_k_min == RunConfig::kBandAuto ? band.k_min : cfg.loc_k_min;
  const int k_hi = cfg.loc_k_max == RunConfig::kBandAuto ? band.k_max : cfg.loc_k_max;

  LocalizedBoundStats stats;
  stats.nc = cfg.nc;
  stats.eps = 10.0 / cfg.nc;
  stats.m1 = moment(e, 1.0, cfg.threads);
  double f_inf = 0.0;
  for (const auto& p : e.p) f_inf = std::max(f_inf, p.f0);
  stats.f_inf = f_inf;
  stats.m_tilde_nc = std::exp2(log2_enlarged_moment(cfg.nc, t_now, sup_moment_nc));
  stats.Mt = moment_scale(cfg.nc, t_now, sup_moment_nc);

  nlohmann::json entries = nlohmann::json::array();
  double max_ratio = 0.0, max_off_axis = 0.0;
  std::size_t failures = 0, evaluated = 0;
  for (int j2 = 0; j2 <= cfg.loc_j2_max; ++j2) {
    for (int j1 = 0; j1 <= std::min(cfg.loc_j1_max, j2 + 2); ++j1) {
      const FieldGrid binned = velocity_bin_deposit(e, spec, j1, j2);
      for (int k = k_lo; k <= k_hi; ++k) {
        BoundEntry be;
        if (binned.deposited_mass == 0.0) {
          be.index = DyadicIndex{k, j1, j2};  // zero density, zero field by linearity
        } else {
          const LocalizedField lf = localized_field(binned, k);
          be = evaluate_bound_entry(lf, stats, cfg.loc_constant);
        }
        ++evaluated;
        max_ratio = std::max(max_ratio, be.ratio);
        max_off_axis = std::max(max_off_axis, be.off_axis_ratio);
        if (!be.pass) ++failures;
        entries.push_back({{"k", be.index.k},
                           {"j1", be.index.j1},
                           {"j2", be.index.j2},
                           {"sup_norm", be.sup_norm},
                           {"bound_value", be.bound_value},
                           {"ratio", be.ratio},
                           {"off_axis_ratio", be.off_axis_ratio},
                           {"pass", be.pass}});
      }
    }
  }

  nlohmann::json rep;
  rep["band"] = {k_lo, k_hi};
  rep["constant"] = cfg.loc_constant;
  rep["evaluated"] = evaluated;
  rep["failures"] = failures;
  rep["max_ratio"] = max_ratio;
  rep["max_off_axis_ratio"] = max_off_axis;
  rep["stats"] = {{"f_inf", stats.f_inf},
                  {"m1", stats.m1},
                  {"m_tilde_nc", stats.m_tilde_nc},
                  {"Mt", stats.Mt},
                  {"eps", stats.eps}};
  rep["entries"] = entries;
  detail::write_text_file(json_path, rep.dump(2) + "\n");

  std::string csv = "family,fitted_ratio,constant\n";
  csv += "envelope," + fmt17(max_ratio) + "," + fmt17(cfg.loc_constant) + "\n";
  csv += "off_axis," + fmt17(max_off_axis) + "," + fmt17(cfg.loc_constant) + "\n";
  detail::write_text_file(csv_path, csv);
}

struct RunResult {
  std::uint64_t steps = 0;
  std::uint64_t monotone_violations = 0;
  double a_cum = 0.0;
  std::string out_dir;
};

// Core pipeline shared by run and resume. When `seed_state` is nonempty the
// run continues from a checkpoint: `e` is the restored state, `step0` / the
// carried extremes come from the checkpoint, and the CSV blobs are appended to.
template <class Backend>
RunResult run_pipeline(const RunConfig& cfg, Ensemble& e, Backend& backend,
                       std::uint64_t step0, const Checkpoint* carry,
                       const std::string& resumed_from) {
  namespace fs = std::filesystem;
  const auto wall0 = std::chrono::steady_clock::now();
  if (cfg.out.empty()) throw std::runtime_error("no output directory (set run.out or --out)");
  if (fs::exists(cfg.out))
    throw std::runtime_error("output directory exists, refusing to overwrite: " + cfg.out);
  fs::create_directories(cfg.out);
  const std::string dir = cfg.out + "/";

  IntegrateParams prm = detail::integrate_params(cfg);
  DiagnosticsSeries head;
  head.moment_orders = prm.moment_orders;
  std::string diag_csv = head.header() + "\n";
  std::string traj_csv = TrajectoryLog::header() + "\n";

  prm.step0 = step0;
  if (carry != nullptr) {
    prm.a_cum0 = carry->a_cum;
    prm.max_speed0 = carry->max_speed;
    prm.min_planar_radius0 = carry->min_planar_radius;
    prm.sup_moment_nc0 = carry->sup_moment_nc;
    diag_csv = carry->diag_csv;
    traj_csv = carry->traj_csv;
  }

  const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(cfg.t_end / cfg.dt));
  std::uint64_t violations = carry != nullptr ? carry->monotone_violations : 0;
  double worst = carry != nullptr ? carry->monotone_worst : 0.0;

  auto make_checkpoint = [&](const IntegrateResult& r, std::uint64_t at_step) {
    Checkpoint c;
    c.config_hash = cfg.hash();
    c.config_text = cfg.canonical();
    c.global_step = at_step;
    c.t_origin = 0.0;
    c.ensemble = e;
    Rng rng(cfg.seed);
    c.rng_state = rng.serialize();
    c.a_cum = r.a_cum;
    c.max_speed = r.max_speed;
    c.min_planar_radius = r.min_planar_radius;
    c.sup_moment_nc = r.sup_moment_nc;
    c.monotone_violations = violations;
    c.monotone_worst = worst;
    c.diag_csv = diag_csv;
    c.traj_csv = traj_csv;
    return c;
  };

  IntegrateResult res;
  const std::uint64_t cs = cfg.checkpoint_step;
  if (cs > step0 && cs < nsteps) {
    IntegrateParams p1 = prm;
    p1.step_limit = cs;
    res = integrate(e, backend, p1);
    detail::append_diag_rows(diag_csv, res.diag);
    detail::append_traj_rows(traj_csv, res.traj);
    violations += res.monotone_violations;
    worst = std::min(worst, res.monotone_worst);
    write_checkpoint(dir + "checkpoint_" + std::to_string(cs) + ".bin", make_checkpoint(res, cs));

    IntegrateParams p2 = prm;
    p2.step0 = cs;
    p2.a_cum0 = res.a_cum;
    p2.max_speed0 = res.max_speed;
    p2.min_planar_radius0 = res.min_planar_radius;
    p2.sup_moment_nc0 = res.sup_moment_nc;
    res = integrate(e, backend, p2);
    detail::append_diag_rows(diag_csv, res.diag);
    detail::append_traj_rows(traj_csv, res.traj);
    violations += res.monotone_violations;
    worst = std::min(worst, res.monotone_worst);
  } else {
    res = integrate(e, backend, prm);
    detail::append_diag_rows(diag_csv, res.diag);
    detail::append_traj_rows(traj_csv, res.traj);
    violations += res.monotone_violations;
    worst = std::min(worst, res.monotone_worst);
  }

  detail::write_text_file(dir + "diagnostics.csv", diag_csv);
  detail::write_text_file(dir + "trajectory.csv", traj_csv);
  detail::write_text_file(dir + "config.ini", cfg.canonical());
  write_checkpoint(dir + "checkpoint.bin", make_checkpoint(res, nsteps));

  std::vector<std::string> artifacts{"diagnostics.csv", "trajectory.csv", "config.ini",
                                     "checkpoint.bin"};
  if (cs > step0 && cs < nsteps) artifacts.push_back("checkpoint_" + std::to_string(cs) + ".bin");
  if (cfg.loc_enabled) {
    run_localization_suite(cfg, e, cfg.t_end, res.sup_moment_nc, dir + "localization.json",
                           dir + "localization_summary.csv");
    artifacts.push_back("localization.json");
    artifacts.push_back("localization_summary.csv");
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  nlohmann::json man;
  man["schema_version"] = 1;
  man["program"] = "rvp";
  man["config_hash"] = detail::hash_hex(cfg.hash());
  man["seed"] = cfg.seed;
  man["n"] = cfg.n;
  man["steps"] = nsteps;
  man["backend"] = cfg.backend;
  man["threads"] = cfg.threads;
  man["wall_time_s"] = wall;
  man["artifacts"] = artifacts;
  man["monotone_violations"] = violations;
  man["a_cum"] = res.a_cum;
  if (!resumed_from.empty()) man["resumed_from"] = resumed_from;
  detail::write_text_file(dir + "manifest.json", man.dump(2) + "\n");

  RunResult out;
  out.steps = nsteps;
  out.monotone_violations = violations;
  out.a_cum = res.a_cum;
  out.out_dir = cfg.out;
  return out;
}

inline RunResult run_config(const RunConfig& cfg) {
  Ensemble e = cfg.scenario.sample(cfg.n, cfg.seed);
  return detail::with_backend(cfg, [&](auto& backend) {
    return run_pipeline(cfg, e, backend, 0, nullptr, "");
  });
}

inline RunResult resume_checkpoint(const std::string& ckpt_path, const std::string& out_dir,
                                   int threads) {
  Checkpoint c = read_checkpoint(ckpt_path);
  RunConfig cfg = parse_config(c.config_text);
  if (cfg.hash() != c.config_hash)
    throw std::runtime_error("checkpoint config hash mismatch: file corrupt or edited");
  cfg.out = out_dir;
  if (threads > 0) cfg.threads = threads;
  return detail::with_backend(cfg, [&](auto& backend) {
    return run_pipeline(cfg, c.ensemble, backend, c.global_step, &c, ckpt_path);
  });
}

inline void write_error_json(const std::string& out_dir, const std::string& message) {
  try {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    nlohmann::json j;
    j["error"] = message;
    detail::write_text_file(out_dir + "/error.json", j.dump(2) + "\n");
  } catch (...) {
    // error reporting must not mask the original failure
  }
}

}  // namespace rvp
