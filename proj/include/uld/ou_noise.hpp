#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "uld/ou_kernels.hpp"
#include "uld/rng.hpp"

namespace uld {

// Exact per-coordinate second moments of the one-step Gaussian integrals
// (xi^(1), xi^(2)) over a segment of length dt, plus the 2x2 Cholesky factor
// used for sampling. The diffusion is isotropic, so scalars suffice.
struct NoiseBlock {
  double gamma = 0.0;
  double dt = 0.0;
  double var_x = 0.0;
  double var_p = 0.0;
  double cov_xp = 0.0;
  // lower-triangular factor of [[var_x, cov_xp], [cov_xp, var_p]]
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

NoiseBlock noise_block(double gamma, double dt);

// One jointly-drawn (xi^(1), xi^(2)) pair over a segment.
struct NoisePair {
  Eigen::VectorXd xi1;
  Eigen::VectorXd xi2;
  double dt = 0.0;
};

NoisePair draw_noise_pair(const NoiseBlock& block, int dim, RngStream& rng);

// Semigroup composition: given the pair over [0, dt1] and the pair over
// [dt1, dt1+dt2] (second segment), returns the pair over [0, dt1+dt2].
NoisePair compose_noise(const NoisePair& first, const NoisePair& second, double gamma);

// One coarse step's worth of noise: the full-step pair plus the prefix values
// of xi^(1) at requested intermediate times, all restrictions of a single
// underlying Brownian path. seed_path keeps the per-segment sub-draws so the
// composition can be replayed and checked.
struct StepNoiseDraw {
  Eigen::VectorXd xi1_full;
  Eigen::VectorXd xi2_full;
  std::map<double, Eigen::VectorXd> xi1_at;
  std::vector<NoisePair> seed_path;
};

StepNoiseDraw draw_step_noise(double gamma, double h, const std::vector<double>& intermediate_times,
                              int dim, RngStream& rng);

}  // namespace uld
