#include "bench/schedule.hpp"

#include <cmath>

#include "uld/errors.hpp"

namespace uld::bench {

TheoremSchedule parse_schedule(const std::string& name) {
  if (name == "ulmc-sc") return TheoremSchedule::kUlmcSc;
  if (name == "ulmc-gc") return TheoremSchedule::kUlmcGc;
  if (name == "rmd-sc") return TheoremSchedule::kRmdSc;
  if (name == "rmd-gc") return TheoremSchedule::kRmdGc;
  throw ContractError("unknown schedule: " + name);
}

Schedule schedule_from_theorem(TheoremSchedule which, const PotentialModel& model, double eps,
                               double h_prefactor, double n_prefactor, double w_bound) {
  if (!(eps > 0.0)) throw ContractError("schedule_from_theorem: eps must be > 0");
  const double beta = model.beta();
  const double alpha = model.alpha();
  const double tr = model.hessian_trace();
  Schedule s;

  const bool strongly_convex =
      which == TheoremSchedule::kUlmcSc || which == TheoremSchedule::kRmdSc;
  if (strongly_convex && !(alpha > 0.0))
    throw ContractError("schedule_from_theorem: strongly-convex schedule requires alpha > 0");
  if (!strongly_convex && !(w_bound > 0.0))
    throw ContractError("schedule_from_theorem: general-convex schedule requires a W2 bound");

  const double kappa = strongly_convex ? beta / alpha : 0.0;

  switch (which) {
    case TheoremSchedule::kUlmcSc:
      s.h = h_prefactor * eps / (kappa * std::sqrt(tr));
      s.n = n_prefactor * std::pow(kappa, 1.5) * std::sqrt(tr / beta) / eps;
      s.eps_in_range = eps <= std::sqrt(tr / (beta * kappa));
      break;
    case TheoremSchedule::kUlmcGc:
      s.h = h_prefactor * std::min(eps * eps / (std::sqrt(beta * tr) * w_bound),
                                   eps * eps / (std::pow(beta, 1.5) * w_bound * w_bound));
      s.n = n_prefactor * std::max(beta * std::sqrt(tr) * w_bound / std::pow(eps, 4),
                                   beta * beta * std::pow(w_bound, 4) / std::pow(eps, 4));
      s.eps_in_range = eps <= std::sqrt(beta) * w_bound;
      break;
    case TheoremSchedule::kRmdSc:
      s.h = h_prefactor * std::pow(beta, -1.0 / 6.0) * std::pow(tr, -1.0 / 3.0) *
            std::pow(eps, 2.0 / 3.0);
      s.n = n_prefactor * kappa * std::cbrt(tr / beta) * std::pow(eps, -2.0 / 3.0);
      s.eps_in_range = eps <= std::sqrt(tr) * std::pow(beta, -1.5) * std::pow(kappa, -0.75);
      break;
    case TheoremSchedule::kRmdGc:
      s.h = h_prefactor * eps / (std::sqrt(beta) * std::pow(tr, 0.25) * std::sqrt(w_bound));
      s.n = n_prefactor * beta * std::pow(tr, 0.25) * std::pow(w_bound, 2.5) / std::pow(eps, 3);
      s.eps_in_range = eps <= std::min(std::sqrt(beta) * w_bound,
                                       std::pow(tr, 0.75) / (beta * std::sqrt(w_bound)));
      break;
  }
  if (!s.eps_in_range) s.warning = "eps outside the schedule's stated range";
  return s;
}

}  // namespace uld::bench
