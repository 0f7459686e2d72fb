#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bench/experiments.hpp"
#include "uld/errors.hpp"
#include "uld/selftest.hpp"
#include "uld/version.hpp"

namespace {

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("ULD_KIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

int run_selftests() {
  int failures = 0;

  const uld::NoiseSelftestReport noise = uld::noise_selftest(200000, 20240817ULL);
  std::cout << "noise:    max moment rel err " << noise.max_moment_rel_err << ", composition err "
            << noise.composition_max_abs_err << ", joint dev " << noise.joint_max_dev_se
            << " SE -> " << (noise.pass ? "ok" : "FAIL") << "\n";
  failures += noise.pass ? 0 : 1;

  const uld::MidpointSelftestReport mid = uld::midpoint_selftest(100000, 20240817ULL);
  double worst_ks = 0.0, worst_id = 0.0;
  for (const auto& k : mid.ks) worst_ks = std::max({worst_ks, k.ks_u, k.ks_v});
  for (const auto& idr : mid.identities)
    worst_id = std::max({worst_id, idr.residual_u, idr.residual_v});
  std::cout << "midpoint: worst KS " << worst_ks << ", worst identity residual " << worst_id
            << " -> " << (mid.pass ? "ok" : "FAIL") << "\n";
  failures += mid.pass ? 0 : 1;

  const uld::OracleSelftestReport oracle = uld::oracle_selftest();
  std::cout << "oracle:   kl spot " << oracle.kl_spot_err << ", w2 spot " << oracle.w2_spot_err
            << ", fixed-point routes " << oracle.fixed_point_route_err << ", dense-vs-mode "
            << oracle.dense_mode_err << " -> " << (oracle.pass ? "ok" : "FAIL") << "\n";
  failures += oracle.pass ? 0 : 1;

  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"underdamped Langevin sampling benchmark kit"};
  app.set_version_flag("--version", uld::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  bool assert_mode = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_flag("--assert", assert_mode, "exit 2 when an acceptance check fails");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--threads", threads, "worker threads (ULD_KIT_THREADS as fallback)");

  CLI::App* selftest = app.add_subcommand("selftest", "run noise/midpoint/oracle validations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest->parsed()) return run_selftests();
    const uld::bench::ExperimentOutcome outcome =
        uld::bench::run_experiment(config_path, out_dir, resolve_threads(threads), assert_mode);
    if (!outcome.checks_pass)
      std::cerr << "checks failed (see " << out_dir << "/summary.json)\n";
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
