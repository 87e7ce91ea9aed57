// Command-line front end: run / verify / resume.
//
//   rvp run <config.ini>    [--out DIR] [--seed N] [--threads N]
//   rvp verify <config.ini> [--sweep] [--out DIR] [--seed N] [--threads N]
//   rvp resume <checkpoint> --out DIR [--threads N]
//
// Thread count resolution: --threads beats RVP_THREADS beats the config value.
// Results are identical for any thread count; only wall time changes.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rvp/config.hpp"
#include "rvp/run.hpp"
#include "rvp/verify.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int env_threads() {
  const char* s = std::getenv("RVP_THREADS");
  if (s == nullptr || *s == '\0') return 0;
  return std::atoi(s);
}

rvp::RunConfig load_config(const std::string& path, const std::string& out_override,
                           long long seed_override, int threads_override) {
  rvp::RunConfig cfg = rvp::parse_config(slurp(path));
  if (!out_override.empty()) cfg.out = out_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  if (threads_override > 0)
    cfg.threads = threads_override;
  else if (env_threads() > 0)
    cfg.threads = env_threads();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"particle simulator for the relativistic Vlasov-Poisson system"};
  app.require_subcommand(1);

  std::string config_path, ckpt_path, out_override;
  long long seed_override = -1;
  int threads_override = 0;
  bool sweep = false;

  CLI::App* run = app.add_subcommand("run", "integrate a configured scenario and emit artifacts");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_override, "output directory (fresh; never overwritten)");
  run->add_option("--seed", seed_override, "override the sampling seed");
  run->add_option("--threads", threads_override, "worker thread count");

  CLI::App* verify = app.add_subcommand("verify", "run the property suites at the config's scale");
  verify->add_option("config", config_path, "config file")->required();
  verify->add_flag("--sweep", sweep, "add a dt-halving convergence table");
  verify->add_option("--out", out_override, "also write verify.json into this fresh directory");
  verify->add_option("--seed", seed_override, "override the sampling seed");
  verify->add_option("--threads", threads_override, "worker thread count");

  CLI::App* resume = app.add_subcommand("resume", "continue a run from a checkpoint");
  resume->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
  resume->add_option("--out", out_override, "output directory (fresh; never overwritten)")
      ->required();
  resume->add_option("--threads", threads_override, "worker thread count");

  CLI11_PARSE(app, argc, argv);

  std::string out_dir_for_errors = out_override;
  try {
    if (run->parsed()) {
      rvp::RunConfig cfg = load_config(config_path, out_override, seed_override, threads_override);
      out_dir_for_errors = cfg.out;
      const rvp::RunResult r = rvp::run_config(cfg);
      std::cout << "run complete: " << r.steps << " steps, artifacts in " << r.out_dir << "\n";
      return 0;
    }
    if (verify->parsed()) {
      rvp::RunConfig cfg = load_config(config_path, "", seed_override, threads_override);
      const rvp::VerifyReport rep = rvp::verify_config(cfg, sweep);
      const nlohmann::json j = rvp::verify_report_json(rep);
      std::cout << j.dump(2) << "\n";
      if (!out_override.empty()) {
        namespace fs = std::filesystem;
        if (fs::exists(out_override))
          throw std::runtime_error("output directory exists, refusing to overwrite: " +
                                   out_override);
        fs::create_directories(out_override);
        rvp::detail::write_text_file(out_override + "/verify.json", j.dump(2) + "\n");
      }
      for (const auto& c : rep.checks) {
        std::cerr << (c.pass ? "PASS" : "FAIL") << "  " << c.name
                  << (c.skipped ? "  (skipped: " + c.note + ")" : "") << "\n";
      }
      return rep.all_pass() ? 0 : 1;
    }
    // resume
    const int threads = threads_override > 0 ? threads_override : env_threads();
    const rvp::RunResult r = rvp::resume_checkpoint(ckpt_path, out_override, threads);
    std::cout << "resume complete: " << r.steps << " steps, artifacts in " << r.out_dir << "\n";
    return 0;
  } catch (const std::exception& ex) {
    rvp::write_error_json(out_dir_for_errors, ex.what());
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
