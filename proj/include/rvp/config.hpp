#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvp/csv.hpp"
#include "rvp/scenario.hpp"

// Run configuration: strict line-oriented "key = value" under [section]
// headers. Unknown keys, duplicates, malformed numbers, and out-of-range
// values are parse errors carrying the offending line number. The canonical
// form (all keys, sorted, values re-formatted) feeds the config hash, so key
// order and number spelling do not affect identity; threads and output
// location are orchestration knobs and stay outside the hash.

namespace rvp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  Scenario scenario;

  std::size_t n = 10000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double t_end = 1.0;
  std::string backend = "radial";
  std::uint64_t field_refresh = 1;
  int threads = 1;
  std::string out;
  std::uint64_t checkpoint_step = 0;  // 0: only the final checkpoint

  double softening = 1e-3;      // direct backend
  std::size_t radial_bins = 2048;
  double radial_rmax = 16.0;
  std::size_t grid_n = 64;
  double grid_half = 8.0;

  std::uint64_t record_interval = 100;
  std::uint64_t traj_count = 16;
  std::uint64_t traj_stride = 10;
  std::vector<double> moments{1.0, 2.0, 20.0};
  double nc = 20.0;
  double eps_star = 0.005;
  double delta0 = 1e-3;
  double j_floor = 1e-8;
  double monotone_band = 0.0;

  bool loc_enabled = false;
  std::size_t loc_grid_n = 64;
  double loc_grid_half = 8.0;
  int loc_j1_max = 6;
  int loc_j2_max = 6;
  int loc_k_min = kBandAuto;
  int loc_k_max = kBandAuto;
  double loc_constant = 50.0;

  static constexpr int kBandAuto = -1000000;

  std::string canonical() const;
  std::uint64_t hash() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, int line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') throw ConfigError(line, "expected a number, got '" + v + "'");
  return x;
}

inline long long parse_int(const std::string& v, int line) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') throw ConfigError(line, "expected an integer, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_uint(const std::string& v, int line) {
  const long long x = parse_int(v, line);
  if (x < 0) throw ConfigError(line, "expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(line, "expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  std::string tok;
  std::istringstream is(v);
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) throw ConfigError(line, "empty entry in list");
    out.push_back(parse_double(tok, line));
  }
  if (out.empty()) throw ConfigError(line, "empty list");
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, int> seen;  // "section.key" -> line
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;

  auto set = [&](const std::string& key, const std::string& value) {
    const std::string full = section + "." + key;
    if (seen.count(full)) throw ConfigError(line, "duplicate key '" + full + "'");
    seen[full] = line;

    if (full == "scenario.kind") cfg.scenario.kind = scenario_kind_from(value);
    else if (full == "scenario.mass") cfg.scenario.mass = detail::parse_double(value, line);
    else if (full == "scenario.sigma_v") cfg.scenario.sigma_v = detail::parse_double(value, line);
    else if (full == "scenario.sigma_x") cfg.scenario.sigma_x = detail::parse_double(value, line);
    else if (full == "scenario.r0") cfg.scenario.r0 = detail::parse_double(value, line);
    else if (full == "scenario.sigma_r") cfg.scenario.sigma_r = detail::parse_double(value, line);
    else if (full == "scenario.sigma_z") cfg.scenario.sigma_z = detail::parse_double(value, line);
    else if (full == "scenario.vanish_p") cfg.scenario.vanish_p = detail::parse_double(value, line);
    else if (full == "scenario.ell_ref") cfg.scenario.ell_ref = detail::parse_double(value, line);
    else if (full == "scenario.v_max") cfg.scenario.v_max = detail::parse_double(value, line);
    else if (full == "run.n") cfg.n = static_cast<std::size_t>(detail::parse_uint(value, line));
    else if (full == "run.seed") cfg.seed = detail::parse_uint(value, line);
    else if (full == "run.dt") cfg.dt = detail::parse_double(value, line);
    else if (full == "run.t_end") cfg.t_end = detail::parse_double(value, line);
    else if (full == "run.backend") cfg.backend = value;
    else if (full == "run.field_refresh") cfg.field_refresh = detail::parse_uint(value, line);
    else if (full == "run.threads") cfg.threads = static_cast<int>(detail::parse_uint(value, line));
    else if (full == "run.out") cfg.out = value;
    else if (full == "run.checkpoint_step") cfg.checkpoint_step = detail::parse_uint(value, line);
    else if (full == "backend.softening") cfg.softening = detail::parse_double(value, line);
    else if (full == "backend.bins") cfg.radial_bins = static_cast<std::size_t>(detail::parse_uint(value, line));
    else if (full == "backend.r_max") cfg.radial_rmax = detail::parse_double(value, line);
    else if (full == "backend.grid_n") cfg.grid_n = static_cast<std::size_t>(detail::parse_uint(value, line));
    else if (full == "backend.grid_half") cfg.grid_half = detail::parse_double(value, line);
    else if (full == "diagnostics.record_interval") cfg.record_interval = detail::parse_uint(value, line);
    else if (full == "diagnostics.traj_count") cfg.traj_count = detail::parse_uint(value, line);
    else if (full == "diagnostics.traj_stride") cfg.traj_stride = detail::parse_uint(value, line);
    else if (full == "diagnostics.moments") cfg.moments = detail::parse_double_list(value, line);
    else if (full == "diagnostics.nc") cfg.nc = detail::parse_double(value, line);
    else if (full == "diagnostics.eps_star") cfg.eps_star = detail::parse_double(value, line);
    else if (full == "diagnostics.delta0") cfg.delta0 = detail::parse_double(value, line);
    else if (full == "diagnostics.j_floor") cfg.j_floor = detail::parse_double(value, line);
    else if (full == "diagnostics.monotone_band") cfg.monotone_band = detail::parse_double(value, line);
    else if (full == "localization.enabled") cfg.loc_enabled = detail::parse_bool(value, line);
    else if (full == "localization.grid_n") cfg.loc_grid_n = static_cast<std::size_t>(detail::parse_uint(value, line));
    else if (full == "localization.grid_half") cfg.loc_grid_half = detail::parse_double(value, line);
    else if (full == "localization.j1_max") cfg.loc_j1_max = static_cast<int>(detail::parse_int(value, line));
    else if (full == "localization.j2_max") cfg.loc_j2_max = static_cast<int>(detail::parse_int(value, line));
    else if (full == "localization.k_min") cfg.loc_k_min = static_cast<int>(detail::parse_int(value, line));
    else if (full == "localization.k_max") cfg.loc_k_max = static_cast<int>(detail::parse_int(value, line));
    else if (full == "localization.constant") cfg.loc_constant = detail::parse_double(value, line);
    else throw ConfigError(line, "unknown key '" + full + "'");
  };

  while (std::getline(is, raw)) {
    ++line;
    std::string s = raw;
    const std::size_t cut = s.find_first_of("#;");
    if (cut != std::string::npos) s = s.substr(0, cut);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ConfigError(line, "malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
    if (section.empty()) throw ConfigError(line, "key '" + key + "' before any [section]");
    set(key, value);
  }

  // Range validation, grouped here so file order cannot matter.
  auto fail = [&](const std::string& what) { throw ConfigError("invalid value: " + what); };
  if (cfg.n == 0) fail("run.n must be positive");
  if (!(cfg.dt > 0.0)) fail("run.dt must be positive");
  if (!(cfg.t_end > 0.0)) fail("run.t_end must be positive");
  if (cfg.backend != "radial" && cfg.backend != "direct" && cfg.backend != "grid")
    fail("run.backend must be radial, direct, or grid");
  if (cfg.backend == "radial" && !cfg.scenario.is_radial())
    fail("radial backend requires a radially symmetric scenario");
  if (cfg.field_refresh == 0) fail("run.field_refresh must be >= 1");
  if (cfg.threads < 1) fail("run.threads must be >= 1");
  if (cfg.checkpoint_step % cfg.field_refresh != 0)
    fail("run.checkpoint_step must be a multiple of run.field_refresh");
  if (!(cfg.scenario.mass > 0.0)) fail("scenario.mass must be positive");
  if (!(cfg.scenario.sigma_v > 0.0) || !(cfg.scenario.sigma_x > 0.0) ||
      !(cfg.scenario.sigma_r > 0.0) || !(cfg.scenario.sigma_z > 0.0))
    fail("scenario widths must be positive");
  if (!(cfg.scenario.r0 > 0.0)) fail("scenario.r0 must be positive");
  if (!(cfg.scenario.v_max > 0.0)) fail("scenario.v_max must be positive");
  if (!(cfg.scenario.vanish_p > 0.0) || !(cfg.scenario.ell_ref > 0.0))
    fail("scenario vanishing-momentum parameters must be positive");
  if (!(cfg.softening >= 0.0)) fail("backend.softening must be nonnegative");
  if (cfg.radial_bins == 0) fail("backend.bins must be positive");
  if (!(cfg.radial_rmax > 0.0)) fail("backend.r_max must be positive");
  if (cfg.grid_n < 8) fail("backend.grid_n must be >= 8");
  if (!(cfg.grid_half > 0.0)) fail("backend.grid_half must be positive");
  if (cfg.traj_stride == 0) fail("diagnostics.traj_stride must be >= 1");
  if (cfg.traj_count > cfg.n) fail("diagnostics.traj_count exceeds run.n");
  for (double m : cfg.moments)
    if (!(m >= 0.0)) fail("diagnostics.moments entries must be >= 0");
  if (!(cfg.nc > 1.0)) fail("diagnostics.nc must exceed 1");
  if (!(cfg.eps_star > 0.0 && cfg.eps_star < 0.5)) fail("diagnostics.eps_star must lie in (0, 1/2)");
  if (!(cfg.delta0 > 0.0)) fail("diagnostics.delta0 must be positive");
  if (!(cfg.j_floor > 0.0)) fail("diagnostics.j_floor must be positive");
  if (!(cfg.monotone_band >= 0.0)) fail("diagnostics.monotone_band must be nonnegative");
  if (cfg.loc_enabled) {
    if (cfg.loc_grid_n < 8) fail("localization.grid_n must be >= 8");
    if (!(cfg.loc_grid_half > 0.0)) fail("localization.grid_half must be positive");
    if (cfg.loc_j1_max < 0 || cfg.loc_j2_max < 0) fail("localization bin maxima must be >= 0");
    if (!(cfg.loc_constant > 0.0)) fail("localization.constant must be positive");
  }
  const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(cfg.t_end / cfg.dt));
  if (cfg.checkpoint_step > nsteps) fail("run.checkpoint_step beyond the run horizon");
  return cfg;
}

inline std::string RunConfig::canonical() const {
  std::map<std::string, std::map<std::string, std::string>> kv;
  auto num = [](double v) { return fmt17(v); };
  kv["scenario"]["kind"] = to_string(scenario.kind);
  kv["scenario"]["mass"] = num(scenario.mass);
  kv["scenario"]["sigma_v"] = num(scenario.sigma_v);
  kv["scenario"]["sigma_x"] = num(scenario.sigma_x);
  kv["scenario"]["r0"] = num(scenario.r0);
  kv["scenario"]["sigma_r"] = num(scenario.sigma_r);
  kv["scenario"]["sigma_z"] = num(scenario.sigma_z);
  kv["scenario"]["vanish_p"] = num(scenario.vanish_p);
  kv["scenario"]["ell_ref"] = num(scenario.ell_ref);
  kv["scenario"]["v_max"] = num(scenario.v_max);
  kv["run"]["n"] = std::to_string(n);
  kv["run"]["seed"] = std::to_string(seed);
  kv["run"]["dt"] = num(dt);
  kv["run"]["t_end"] = num(t_end);
  kv["run"]["backend"] = backend;
  kv["run"]["field_refresh"] = std::to_string(field_refresh);
  kv["run"]["checkpoint_step"] = std::to_string(checkpoint_step);
  kv["backend"]["softening"] = num(softening);
  kv["backend"]["bins"] = std::to_string(radial_bins);
  kv["backend"]["r_max"] = num(radial_rmax);
  kv["backend"]["grid_n"] = std::to_string(grid_n);
  kv["backend"]["grid_half"] = num(grid_half);
  kv["diagnostics"]["record_interval"] = std::to_string(record_interval);
  kv["diagnostics"]["traj_count"] = std::to_string(traj_count);
  kv["diagnostics"]["traj_stride"] = std::to_string(traj_stride);
  {
    std::string lst;
    for (std::size_t i = 0; i < moments.size(); ++i) {
      if (i) lst += ",";
      lst += num(moments[i]);
    }
    kv["diagnostics"]["moments"] = lst;
  }
  kv["diagnostics"]["nc"] = num(nc);
  kv["diagnostics"]["eps_star"] = num(eps_star);
  kv["diagnostics"]["delta0"] = num(delta0);
  kv["diagnostics"]["j_floor"] = num(j_floor);
  kv["diagnostics"]["monotone_band"] = num(monotone_band);
  kv["localization"]["enabled"] = loc_enabled ? "true" : "false";
  kv["localization"]["grid_n"] = std::to_string(loc_grid_n);
  kv["localization"]["grid_half"] = num(loc_grid_half);
  kv["localization"]["j1_max"] = std::to_string(loc_j1_max);
  kv["localization"]["j2_max"] = std::to_string(loc_j2_max);
  kv["localization"]["k_min"] = std::to_string(loc_k_min);
  kv["localization"]["k_max"] = std::to_string(loc_k_max);
  kv["localization"]["constant"] = num(loc_constant);

  std::string out_text;
  for (const auto& [sec, entries] : kv) {
    out_text += "[" + sec + "]\n";
    for (const auto& [key, value] : entries) out_text += key + " = " + value + "\n";
  }
  return out_text;
}

inline std::uint64_t RunConfig::hash() const { return detail::fnv1a64(canonical()); }

}  // namespace rvp
