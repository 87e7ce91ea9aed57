#pragma once

#include <cstddef>
#include <vector>

#include "rvp/kinematics.hpp"
#include "rvp/reduce.hpp"
#include "rvp/vec3.hpp"

namespace rvp {

// Phase-space sample. f0 is the initial density value carried along the
// characteristic; the transport equation keeps it constant, so it is never
// updated after sampling.
struct Particle {
  Vec3 x;
  Vec3 v;
  double w = 0.0;
  double f0 = 0.0;
};

struct Ensemble {
  std::vector<Particle> p;
  // State at sampling time, frozen. Initial-data membership tests (majority
  // sets, per-particle angular momentum checks) read these.
  std::vector<Vec3> x0;
  std::vector<Vec3> v0;
  double target_mass = 0.0;

  std::size_t size() const { return p.size(); }

  void freeze_initial() {
    x0.resize(p.size());
    v0.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      x0[i] = p[i].x;
      v0[i] = p[i].v;
    }
  }

  double mass(int threads = 1) const {
    return indexed_sum(p.size(), threads, [&](std::size_t i) { return p[i].w; });
  }

  // Initial planar angular momentum; exact invariant of the continuous flow.
  double ell0(std::size_t i) const { return planar_angular_momentum(x0[i], v0[i]); }
};

}  // namespace rvp
