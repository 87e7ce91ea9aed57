#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rvp/particle.hpp"
#include "rvp/reduce.hpp"
#include "rvp/vec3.hpp"

// Direct N-body evaluation of the repulsive field
//   E(x) = (1/4pi) sum_j w_j (x - x_j) / (|x - x_j|^2 + eps^2)^(3/2).
// Oracle for every other solver; O(N) per target. Source order is fixed, so
// results are independent of how targets are distributed over threads.

namespace rvp {

inline Vec3 direct_sum_field(const Ensemble& e, const Vec3& x, double softening,
                             std::size_t skip = static_cast<std::size_t>(-1)) {
  const double eps2 = softening * softening;
  Kahan sx, sy, sz;
  for (std::size_t j = 0; j < e.p.size(); ++j) {
    if (j == skip) continue;
    const Vec3 d = x - e.p[j].x;
    const double r2 = norm2(d) + eps2;
    if (r2 == 0.0) continue;  // unsoftened query exactly on a source
    const double f = e.p[j].w / (r2 * std::sqrt(r2));
    sx.add(d.x * f);
    sy.add(d.y * f);
    sz.add(d.z * f);
  }
  const double c = 1.0 / (4.0 * M_PI);
  return {sx.get() * c, sy.get() * c, sz.get() * c};
}

inline std::vector<Vec3> direct_sum_field_batch(const Ensemble& e, const std::vector<Vec3>& xs,
                                                double softening, int threads) {
  std::vector<Vec3> out(xs.size());
  parallel_blocks(xs.size(), threads, [&](std::size_t b0, std::size_t b1, std::size_t) {
    for (std::size_t i = b0; i < b1; ++i) out[i] = direct_sum_field(e, xs[i], softening);
  });
  return out;
}

// Interaction energy (1/8pi) sum_{i != j} w_i w_j / sqrt(|x_i - x_j|^2 + eps^2).
// Matches (1/2) int |E|^2 with self-energies removed.
inline double pairwise_field_energy(const Ensemble& e, double softening, int threads) {
  const double eps2 = softening * softening;
  const double half = indexed_sum(e.p.size(), threads, [&](std::size_t i) {
    Kahan in;
    for (std::size_t j = 0; j < i; ++j) {
      const Vec3 d = e.p[i].x - e.p[j].x;
      in.add(e.p[j].w / std::sqrt(norm2(d) + eps2));
    }
    return e.p[i].w * in.get();
  });
  return half / (4.0 * M_PI);
}

}  // namespace rvp
