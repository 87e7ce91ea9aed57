#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rvp/pusher.hpp"
#include "rvp/vec3.hpp"

// Majority-set summary over a trajectory log: particles whose initial phase
// point satisfies |x0| + |v0| <= threshold, their attained position/speed
// extremes, and the empirical constants against the moment-powered envelopes
//   theta_x = M~^(1/(2 n_r)),  theta_v = M~^((5+2 delta)/((6-2 delta)(n_r-1))).

namespace rvp {

struct MajorityParams {
  double initial_threshold = 0.0;
  double m_tilde = 1.0;  // enlarged moment surrogate at the run horizon
  double n_r = 10.0;
  double delta = 0.5;
  int Mt = 1;
};

struct MajorityReport {
  std::size_t tracked = 0;
  std::size_t majority = 0;
  bool empty_set = false;
  double max_position = 0.0;
  double max_speed = 0.0;
  double theta_x = 0.0;
  double theta_v = 0.0;
  double c_position = 0.0;  // max_position / theta_x
  double c_speed = 0.0;     // max_speed / theta_v
  double beta = 0.0;        // log2(max(1, max_speed)) / Mt
};

inline MajorityReport majority_report(const TrajectoryLog& traj, const MajorityParams& prm) {
  struct Track {
    double t0 = std::numeric_limits<double>::infinity();
    Vec3 x0, v0;
    double max_pos = 0.0, max_speed = 0.0;
  };
  std::map<std::uint64_t, Track> tracks;
  for (const auto& p : traj.points) {
    Track& tr = tracks[p.id];
    if (p.t < tr.t0) {
      tr.t0 = p.t;
      tr.x0 = p.x;
      tr.v0 = p.v;
    }
    tr.max_pos = std::max(tr.max_pos, norm(p.x));
    tr.max_speed = std::max(tr.max_speed, norm(p.v));
  }

  MajorityReport rep;
  rep.tracked = tracks.size();
  for (const auto& [id, tr] : tracks) {
    (void)id;
    if (norm(tr.x0) + norm(tr.v0) > prm.initial_threshold) continue;
    ++rep.majority;
    rep.max_position = std::max(rep.max_position, tr.max_pos);
    rep.max_speed = std::max(rep.max_speed, tr.max_speed);
  }
  rep.empty_set = rep.majority == 0;
  rep.theta_x = std::pow(prm.m_tilde, 1.0 / (2.0 * prm.n_r));
  rep.theta_v =
      std::pow(prm.m_tilde, (5.0 + 2.0 * prm.delta) / ((6.0 - 2.0 * prm.delta) * (prm.n_r - 1.0)));
  if (!rep.empty_set) {
    rep.c_position = rep.max_position / rep.theta_x;
    rep.c_speed = rep.max_speed / rep.theta_v;
    rep.beta = prm.Mt > 0 ? std::log2(std::max(1.0, rep.max_speed)) / prm.Mt : 0.0;
  }
  return rep;
}

}  // namespace rvp
