#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvp/particle.hpp"

// Binary checkpoint, schema RVPCKPT1. Stores the full phase state, the
// canonical config text, the RNG stream, the running integrator carries, and
// the diagnostics/trajectory CSV emitted so far, so a resumed run appends
// rows and reproduces the uninterrupted output byte for byte.

namespace rvp {

struct Checkpoint {
  std::uint64_t schema_version = 1;
  std::uint64_t config_hash = 0;
  std::string config_text;
  std::uint64_t global_step = 0;
  double t_origin = 0.0;
  Ensemble ensemble;
  std::string rng_state;
  double a_cum = 0.0;
  double max_speed = 0.0;
  double min_planar_radius = std::numeric_limits<double>::infinity();
  double sup_moment_nc = 0.0;
  std::uint64_t monotone_violations = 0;
  double monotone_worst = 0.0;
  std::string diag_csv;
  std::string traj_csv;
};

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint layout assumes little endian");

inline void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_blob(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("truncated checkpoint");
  return v;
}
inline double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("truncated checkpoint");
  return v;
}
inline std::string get_blob(std::istream& is) {
  const std::uint64_t len = get_u64(is);
  if (len > (1ull << 32)) throw std::runtime_error("checkpoint blob length implausible");
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw std::runtime_error("truncated checkpoint");
  return s;
}

}  // namespace detail

inline void write_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("RVPCKPT1", 8);
  detail::put_u64(os, c.schema_version);
  detail::put_u64(os, c.config_hash);
  detail::put_blob(os, c.config_text);
  detail::put_u64(os, c.global_step);
  detail::put_f64(os, c.t_origin);

  const Ensemble& e = c.ensemble;
  detail::put_u64(os, e.size());
  for (const auto& p : e.p) {
    detail::put_f64(os, p.x.x);
    detail::put_f64(os, p.x.y);
    detail::put_f64(os, p.x.z);
    detail::put_f64(os, p.v.x);
    detail::put_f64(os, p.v.y);
    detail::put_f64(os, p.v.z);
    detail::put_f64(os, p.w);
    detail::put_f64(os, p.f0);
  }
  if (e.x0.size() != e.size() || e.v0.size() != e.size())
    throw std::runtime_error("checkpoint: initial state not frozen");
  for (const auto& x : e.x0) {
    detail::put_f64(os, x.x);
    detail::put_f64(os, x.y);
    detail::put_f64(os, x.z);
  }
  for (const auto& v : e.v0) {
    detail::put_f64(os, v.x);
    detail::put_f64(os, v.y);
    detail::put_f64(os, v.z);
  }
  detail::put_f64(os, e.target_mass);

  detail::put_blob(os, c.rng_state);
  detail::put_f64(os, c.a_cum);
  detail::put_f64(os, c.max_speed);
  detail::put_f64(os, c.min_planar_radius);
  detail::put_f64(os, c.sup_moment_nc);
  detail::put_u64(os, c.monotone_violations);
  detail::put_f64(os, c.monotone_worst);
  detail::put_blob(os, c.diag_csv);
  detail::put_blob(os, c.traj_csv);
  if (!os) throw std::runtime_error("short write: " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "RVPCKPT1", 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint c;
  c.schema_version = detail::get_u64(is);
  if (c.schema_version != 1) throw std::runtime_error("unsupported checkpoint schema version");
  c.config_hash = detail::get_u64(is);
  c.config_text = detail::get_blob(is);
  c.global_step = detail::get_u64(is);
  c.t_origin = detail::get_f64(is);

  const std::uint64_t n = detail::get_u64(is);
  if (n > (1ull << 31)) throw std::runtime_error("checkpoint particle count implausible");
  Ensemble& e = c.ensemble;
  e.p.resize(n);
  for (auto& p : e.p) {
    p.x.x = detail::get_f64(is);
    p.x.y = detail::get_f64(is);
    p.x.z = detail::get_f64(is);
    p.v.x = detail::get_f64(is);
    p.v.y = detail::get_f64(is);
    p.v.z = detail::get_f64(is);
    p.w = detail::get_f64(is);
    p.f0 = detail::get_f64(is);
  }
  e.x0.resize(n);
  for (auto& x : e.x0) {
    x.x = detail::get_f64(is);
    x.y = detail::get_f64(is);
    x.z = detail::get_f64(is);
  }
  e.v0.resize(n);
  for (auto& v : e.v0) {
    v.x = detail::get_f64(is);
    v.y = detail::get_f64(is);
    v.z = detail::get_f64(is);
  }
  e.target_mass = detail::get_f64(is);

  c.rng_state = detail::get_blob(is);
  c.a_cum = detail::get_f64(is);
  c.max_speed = detail::get_f64(is);
  c.min_planar_radius = detail::get_f64(is);
  c.sup_moment_nc = detail::get_f64(is);
  c.monotone_violations = detail::get_u64(is);
  c.monotone_worst = detail::get_f64(is);
  c.diag_csv = detail::get_blob(is);
  c.traj_csv = detail::get_blob(is);
  return c;
}

}  // namespace rvp
