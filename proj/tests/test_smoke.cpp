// Whole-library smoke: every header compiles together and a tiny radial run
// produces self-consistent artifacts end to end.

#include <gtest/gtest.h>

#include <filesystem>

#include "rvp/checkpoint.hpp"
#include "rvp/config.hpp"
#include "rvp/csv.hpp"
#include "rvp/cutoffs.hpp"
#include "rvp/direct_sum.hpp"
#include "rvp/fft3.hpp"
#include "rvp/functionals.hpp"
#include "rvp/grid.hpp"
#include "rvp/kinematics.hpp"
#include "rvp/localized.hpp"
#include "rvp/majority.hpp"
#include "rvp/particle.hpp"
#include "rvp/poisson.hpp"
#include "rvp/pusher.hpp"
#include "rvp/quadrature.hpp"
#include "rvp/radial_profile.hpp"
#include "rvp/reduce.hpp"
#include "rvp/rng.hpp"
#include "rvp/run.hpp"
#include "rvp/scenario.hpp"
#include "rvp/vec3.hpp"
#include "rvp/verify.hpp"
#include "rvp/weight.hpp"

namespace {

TEST(Smoke, TinyRadialRunEmitsArtifacts) {
  namespace fs = std::filesystem;
  const std::string out = (fs::temp_directory_path() / "rvp_smoke_run").string();
  fs::remove_all(out);

  rvp::RunConfig cfg = rvp::parse_config(
      "[scenario]\n"
      "kind = radial-gaussian\n"
      "[run]\n"
      "n = 200\n"
      "seed = 7\n"
      "dt = 0.01\n"
      "t_end = 0.05\n"
      "backend = radial\n");
  cfg.out = out;
  cfg.record_interval = 1;
  cfg.traj_count = 2;
  cfg.traj_stride = 1;

  const rvp::RunResult r = rvp::run_config(cfg);
  EXPECT_EQ(r.steps, 5u);
  for (const char* name : {"diagnostics.csv", "trajectory.csv", "config.ini", "checkpoint.bin",
                           "manifest.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / name)) << name;
  }
  fs::remove_all(out);
}

}  // namespace
