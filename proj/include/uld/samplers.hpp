#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uld/midpoint.hpp"
#include "uld/ou_noise.hpp"
#include "uld/potential.hpp"
#include "uld/rng.hpp"

namespace uld {

struct PhaseState {
  Eigen::VectorXd x;
  Eigen::VectorXd p;

  static PhaseState Zero(int dim) {
    return PhaseState{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
  }
  bool finite() const { return x.allFinite() && p.allFinite(); }
};

enum class SchemeKind { kUlmc, kRmd, kOlmc, kReference };
const char* scheme_name(SchemeKind s);

// Predictor momentum coefficient for the randomized midpoint update. The
// partial-time form is the standard-ULMC predictor run to the midpoint time
// and is the default; the full-step form is kept for sensitivity studies.
enum class RmdMomentumMode { kPartialTime, kFullStep };

// Deterministic drift weights of one exponential-Euler step of length t.
struct StepCoefficients {
  double decay = 1.0;  // e^{-gamma t}
  double c1 = 0.0;     // (1 - e^{-gamma t}) / gamma
  double c2 = 0.0;     // (t - c1) / gamma
  static StepCoefficients at(double gamma, double t);
};

PhaseState ulmc_step(const PhaseState& state, const PotentialModel& model,
                     const StepCoefficients& coeffs, const Eigen::VectorXd& xi1,
                     const Eigen::VectorXd& xi2);

PhaseState rmd_step(const PhaseState& state, const PotentialModel& model, double gamma, double h,
                    const MidpointPair& midpoint, const StepNoiseDraw& noise,
                    RmdMomentumMode momentum_mode = RmdMomentumMode::kPartialTime);

Eigen::VectorXd olmc_step(const Eigen::VectorXd& x, const PotentialModel& model, double h,
                          const Eigen::VectorXd& gaussian);

// Integrates the underdamped flow over [0, h] with `substeps` exponential-Euler
// substeps (power of two), cutting additionally at the requested intermediate
// times, and simultaneously composes the per-segment noise into the coarse
// pair plus prefix restrictions so a coarse scheme can run on the same
// Brownian path.
std::pair<PhaseState, StepNoiseDraw> reference_uld_step(
    const PhaseState& state, const PotentialModel& model, double gamma, double h, int substeps,
    const std::vector<double>& intermediate_times, RngStream& rng);

// Richardson adequacy check: doubles the substep count (fine path drawn once,
// coarse level obtained by composing segment pairs) until the endpoint moves
// by less than `tol` on every probe path. Throws NumericalError past
// substeps = 2^16.
int choose_reference_substeps(const PhaseState& start, const PotentialModel& model, double gamma,
                              double h, double tol, int initial_substeps, RngStream& rng,
                              int probe_paths = 4);

struct ChainConfig {
  double gamma = 0.0;  // <= 0 picks the sqrt(32 beta) default
  double h = 0.0;
  long n_steps = 0;
  SchemeKind scheme = SchemeKind::kUlmc;
  int ref_substeps = 1024;
  std::uint64_t seed = 0;
  PhaseState init;
  bool final_ulmc_step = false;  // last step switches RMD -> ULMC
  RmdMomentumMode rmd_momentum = RmdMomentumMode::kPartialTime;

  double resolved_gamma(const PotentialModel& model) const;
};

class ChainObserver {
 public:
  virtual ~ChainObserver() = default;
  virtual void on_step(long step, SchemeKind scheme, const PhaseState& state) = 0;
};

struct ChainResult {
  PhaseState final_state;
  long steps = 0;
  double wall_seconds = 0.0;
  double gamma_used = 0.0;
  bool gamma_overridden = false;
  std::vector<SchemeKind> step_log;
  std::vector<std::string> warnings;  // e.g. outside-lemma-regime step size
};

ChainResult run_chain(const ChainConfig& cfg, const PotentialModel& model,
                      const std::vector<ChainObserver*>& observers = {});

// Records per-step summaries; serializes to JSONL (one record per step).
class TrajectoryRecorder : public ChainObserver {
 public:
  explicit TrajectoryRecorder(bool record_full_state = false)
      : record_full_state_(record_full_state) {}
  void on_step(long step, SchemeKind scheme, const PhaseState& state) override;
  std::string to_jsonl() const;

  struct Row {
    long step;
    SchemeKind scheme;
    double x_norm;
    double p_norm;
    Eigen::VectorXd x, p;  // only kept when record_full_state
  };
  const std::vector<Row>& rows() const { return rows_; }

 private:
  bool record_full_state_;
  std::vector<Row> rows_;
};

}  // namespace uld
