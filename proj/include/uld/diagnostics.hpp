#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uld/gaussian_oracle.hpp"
#include "uld/potential.hpp"
#include "uld/samplers.hpp"

namespace uld {

// ---- log-log order fitting --------------------------------------------------

struct FitPoint {
  double h = 0.0;
  double value = 0.0;
  double se = 0.0;
  bool flagged = false;  // excluded from fits (se > 30% of value)
};

struct SlopeFit {
  double slope = 0.0;
  double half_width = 0.0;  // 2x the slope standard error
  int points_used = 0;
};

SlopeFit fit_loglog_slope(const std::vector<FitPoint>& points);

// ---- one-step local error measurement ---------------------------------------

struct LocalErrorOptions {
  SchemeKind scheme = SchemeKind::kUlmc;
  // Uniform fine cells of the coupled reference (power of two, >= 8). The
  // weak-error reference endpoint is Richardson-extrapolated from the three
  // dyadic levels (fine, fine/2, fine/4).
  int fine_substeps = 256;
  long initial_reps = 10000;
  long rep_cap = 40000000;
  double se_target = 0.2;  // relative SE target driving the adaptive doubling
  bool adaptive = true;
  bool antithetic = true;       // Brownian antithetic pairs
  bool control_variate = true;  // zero-noise mean-map recentred by quadrature
  RmdMomentumMode momentum = RmdMomentumMode::kPartialTime;
  int threads = 1;
};

struct LocalErrorPoint {
  double h = 0.0;
  long n_reps = 0;
  double strong_x = 0.0, strong_x_se = 0.0;
  double strong_p = 0.0, strong_p_se = 0.0;
  double weak_x = 0.0, weak_x_se = 0.0;
  double weak_p = 0.0, weak_p_se = 0.0;
  double es_def = 0.0;  // max(strong_x / h, strong_p)
  double ew_def = 0.0;  // max(weak_x / h, weak_p)
  bool strong_x_flagged = false, strong_p_flagged = false;
  bool weak_x_flagged = false, weak_p_flagged = false;
};

struct LocalErrorReport {
  std::vector<LocalErrorPoint> points;
  std::vector<FitPoint> series(const std::string& name) const;  // strong_x|strong_p|weak_x|weak_p
  SlopeFit fit(const std::string& name) const;
};

// Couples the requested scheme to the fine-substep reference on a shared
// Brownian path, per repetition, and accumulates strong (L2) and weak (norm of
// mean difference) one-step errors over the h grid. Repetition substreams are
// keyed by repetition index only, so the grid points share paths and midpoint
// draws (common random numbers across the grid).
LocalErrorReport measure_local_error(const PotentialModel& model, double gamma,
                                     const std::vector<double>& h_grid, const PhaseState& start,
                                     const LocalErrorOptions& opts, std::uint64_t seed);

// Exact mean of the one-step scheme output on a quadratic target (matrix
// exponential for the flow; quadrature over the midpoint law for RMD), used to
// audit the rig's reference bias in tests and selftests.
Eigen::VectorXd exact_one_step_mean_x(const PotentialModel& model, double gamma, double h,
                                      const PhaseState& start, SchemeKind scheme,
                                      RmdMomentumMode momentum = RmdMomentumMode::kPartialTime);
// Exact mean of the continuous flow at time h (quadratic targets).
PhaseState exact_flow_mean(const PotentialModel& model, double gamma, double h,
                           const PhaseState& start);

// ---- concentration checks ----------------------------------------------------

struct ConcentrationReport {
  double lambda = 0.0;
  double mc_log_mgf = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap percentile CI
  double boot_se = 0.0;
  double bound = 0.0;             // 2 lambda tr(H)
  double exact_log_mgf = 0.0;     // eigen-sum closed form
  bool pass = false;              // upper CI <= bound + 3 * CI half-width
  bool cross_check_pass = false;  // |mc - exact| <= 5 boot SE
};

ConcentrationReport check_gradient_concentration(const PotentialModel& model, double lambda,
                                                 long n_samples, std::uint64_t seed);
ConcentrationReport check_momentum_concentration(const PotentialModel& model, double lambda,
                                                 long n_samples, std::uint64_t seed);

// ---- dimension-free schedule sweep -------------------------------------------

struct SweepMember {
  int dim = 0;
  std::vector<std::pair<double, long>> spectrum;  // (curvature, multiplicity)
};

enum class HRule { kTheoremUlmcSc, kTheoremRmdSc, kFixed };

struct SweepRow {
  int dim = 0;
  double h = 0.0;
  long n = -1;  // smallest N with KL <= eps^2; -1 when unattainable
  double kl_achieved = 0.0;
  bool eps_in_range = true;
  std::string error;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double max_over_min_n() const;
  SlopeFit logn_logd_slope() const;
};

// gamma <= 0 selects sqrt(32 beta) per member (beta = max curvature).
SweepReport dimension_free_sweep(const std::vector<SweepMember>& family, double eps,
                                 double gamma, HRule h_rule, double prefactor,
                                 double fixed_h = 0.0, long n_cap = 2000000000L);

}  // namespace uld
