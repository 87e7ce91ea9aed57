#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "rvp/vec3.hpp"

namespace rvp {

// Deterministic sampling stream. mt19937_64 output is pinned by the standard;
// the variate transforms are written out here because the std::*_distribution
// classes are implementation defined and would break bit reproducibility
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1], safe as a log argument.
  double uniform_pos() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

  // Box-Muller with the second variate cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  Vec3 normal3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return {a, b, c};
  }

  // Uniform direction on S^2.
  Vec3 unit_sphere() {
    const double z = 1.0 - 2.0 * uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = 2.0 * M_PI * uniform();
    return {r * std::cos(t), r * std::sin(t), z};
  }

  // Textual state; the cached variate is stored as its bit pattern.
  std::string serialize() const {
    std::ostringstream os;
    os << eng_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::bit_cast<std::uint64_t>(spare_);
    return os.str();
  }

  static Rng deserialize(const std::string& s) {
    Rng r(0);
    std::istringstream is(s);
    is >> r.eng_;
    int has = 0;
    std::uint64_t bits = 0;
    is >> has >> bits;
    r.has_spare_ = has != 0;
    r.spare_ = std::bit_cast<double>(bits);
    return r;
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rvp
