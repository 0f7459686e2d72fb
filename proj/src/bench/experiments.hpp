#pragma once

#include <memory>
#include <string>

#include "bench/config.hpp"
#include "uld/potential.hpp"

namespace uld::bench {

// Builds the potential described by the potential.* keys.
std::unique_ptr<PotentialModel> build_potential(const Config& cfg);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 2 failed --assert checks
  bool checks_pass = true;
};

// Loads the config, dispatches on `experiment`, writes results.csv,
// summary.json and manifest.json into out_dir.
ExperimentOutcome run_experiment(const std::string& config_path, const std::string& out_dir,
                                 int threads, bool assert_mode);

}  // namespace uld::bench
