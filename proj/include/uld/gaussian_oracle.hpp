#pragma once

#include <Eigen/Dense>
#include <vector>

#include "uld/spd_matrix.hpp"

namespace uld {

// Gaussian law on phase space (x, p) in R^{2d}; mean stacked as [x; p].
struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int phase_dim() const { return static_cast<int>(mean.size()); }
};

// One exponential-Euler step on a quadratic potential with precision S is the
// affine map z' = A z + N(0, noise_cov) on phase space (minimizer at origin).
struct AffineStepMap {
  Eigen::MatrixXd A;
  Eigen::MatrixXd noise_cov;
  double stationary_trace_hint = 0.0;  // tr(S^{-1}) + d when S is invertible
};

AffineStepMap ulmc_affine_map(const SpdMatrix& precision, double gamma, double h);

// Applies the map n times (plain iteration, symmetrized each step). Throws
// NumericalError when trace(cov) exceeds 1e12 x the stationary trace hint.
GaussianLaw propagate_law(GaussianLaw law, const AffineStepMap& map, long n);

// Law after n steps from a point mass at `start`, via map squaring (O(log n)).
GaussianLaw law_after_steps(const AffineStepMap& map, const Eigen::VectorXd& start, long n);

// Fixed point of cov <- A cov A^T + Q by doubling, to relative change 1e-13.
GaussianLaw fixed_point_law(const AffineStepMap& map);

// The invariant phase-space law: x ~ N(minimizer, S^{-1}), p ~ N(0, I).
GaussianLaw stationary_phase_law(const SpdMatrix& precision, const Eigen::VectorXd& minimizer);

double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q);
double w2_gaussian(const GaussianLaw& p, const GaussianLaw& q);

// ---- per-eigenvalue (diagonalized) fast path ------------------------------
// For diagonal or diagonalized precisions the phase-space chain splits into d
// independent 2x2 chains, one per curvature eigenvalue. Used by the KL
// schedule searches where n is large.

struct ModeStepMap {
  double a11, a12, a21, a22;
  double qxx, qxp, qpp;
};

ModeStepMap ulmc_mode_map(double curvature, double gamma, double h);
double mode_spectral_radius(const ModeStepMap& m);

struct ModeCov {
  double xx = 0.0, xp = 0.0, pp = 0.0;
};

// Covariance after n steps from a point mass, via squaring.
ModeCov mode_law_cov(const ModeStepMap& m, long n);
// Direct fixed-point solve of the 3x3 linear system (throws if unstable).
ModeCov mode_fixed_point(const ModeStepMap& m);
// KL( N(0, cov) || N(0, diag(1/curvature, 1)) ).
double mode_kl_vs_target(const ModeCov& cov, double curvature);

// Total chain-vs-target KL after n steps for a spectrum of (curvature, count)
// pairs, started from a point mass at the joint minimizer with zero momentum.
double spectrum_kl_after_steps(const std::vector<std::pair<double, long>>& spectrum, double gamma,
                               double h, long n);
double spectrum_stationary_kl(const std::vector<std::pair<double, long>>& spectrum, double gamma,
                              double h);

}  // namespace uld
