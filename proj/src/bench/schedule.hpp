#pragma once

#include <string>

#include "uld/potential.hpp"

namespace uld::bench {

// Step-size / iteration-count schedules, exponents as published, constants and
// log factors folded into user-supplied prefactors (default 1).
enum class TheoremSchedule { kUlmcSc, kUlmcGc, kRmdSc, kRmdGc };

TheoremSchedule parse_schedule(const std::string& name);  // ulmc-sc, ulmc-gc, rmd-sc, rmd-gc

struct Schedule {
  double h = 0.0;
  double n = 0.0;
  bool eps_in_range = true;
  std::string warning;
};

// w_bound is the user-declared initial Wasserstein bound, used by the
// general-convex schedules only.
Schedule schedule_from_theorem(TheoremSchedule which, const PotentialModel& model, double eps,
                               double h_prefactor, double n_prefactor, double w_bound = 0.0);

}  // namespace uld::bench
