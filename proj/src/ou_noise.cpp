#include "uld/ou_noise.hpp"

#include <algorithm>
#include <cmath>

namespace uld {

NoiseBlock noise_block(double gamma, double dt) {
  if (!(gamma > 0.0)) throw ContractError("noise_block: gamma must be > 0");
  if (dt < 0.0) throw ContractError("noise_block: dt must be >= 0");
  NoiseBlock b;
  b.gamma = gamma;
  b.dt = dt;
  if (dt == 0.0) return b;
  b.var_x = ou_var_x(gamma, dt);
  b.var_p = ou_var_p(gamma, dt);
  b.cov_xp = ou_cov_xp(gamma, dt);
  b.l11 = std::sqrt(b.var_x);
  b.l21 = b.l11 > 0.0 ? b.cov_xp / b.l11 : 0.0;
  b.l22 = std::sqrt(std::max(b.var_p - b.l21 * b.l21, 0.0));
  return b;
}

NoisePair draw_noise_pair(const NoiseBlock& block, int dim, RngStream& rng) {
  NoisePair out;
  out.dt = block.dt;
  out.xi1.resize(dim);
  out.xi2.resize(dim);
  for (int i = 0; i < dim; ++i) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    out.xi1[i] = block.l11 * z1;
    out.xi2[i] = block.l21 * z1 + block.l22 * z2;
  }
  return out;
}

NoisePair compose_noise(const NoisePair& first, const NoisePair& second, double gamma) {
  if (!(gamma > 0.0)) throw ContractError("compose_noise: gamma must be > 0");
  if (first.xi1.size() != second.xi1.size())
    throw ContractError("compose_noise: dimension mismatch");
  NoisePair out;
  out.dt = first.dt + second.dt;
  const double decay = ou_decay(gamma, second.dt);
  const double c1 = ou_c1(gamma, second.dt);
  out.xi1 = first.xi1 + c1 * first.xi2 + second.xi1;
  out.xi2 = decay * first.xi2 + second.xi2;
  return out;
}

StepNoiseDraw draw_step_noise(double gamma, double h, const std::vector<double>& intermediate_times,
                              int dim, RngStream& rng) {
  if (!(h > 0.0)) throw ContractError("draw_step_noise: h must be > 0");
  for (std::size_t i = 0; i < intermediate_times.size(); ++i) {
    const double t = intermediate_times[i];
    if (!(t > 0.0) || !(t < h)) throw ContractError("draw_step_noise: times must lie in (0, h)");
    if (i > 0 && !(t > intermediate_times[i - 1]))
      throw ContractError("draw_step_noise: times must be strictly increasing");
  }

  // Partition [0, h] at the requested times (dedupe exact repeats; a zero
  // length segment would contribute a zero draw anyway).
  std::vector<double> cuts = intermediate_times;
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  StepNoiseDraw out;
  out.xi1_full = Eigen::VectorXd::Zero(dim);
  out.xi2_full = Eigen::VectorXd::Zero(dim);

  NoisePair prefix;
  prefix.xi1 = Eigen::VectorXd::Zero(dim);
  prefix.xi2 = Eigen::VectorXd::Zero(dim);
  prefix.dt = 0.0;

  double t_prev = 0.0;
  for (double t : cuts) {
    const NoiseBlock b = noise_block(gamma, t - t_prev);
    NoisePair seg = draw_noise_pair(b, dim, rng);
    out.seed_path.push_back(seg);
    prefix = compose_noise(prefix, seg, gamma);
    out.xi1_at[t] = prefix.xi1;
    t_prev = t;
  }
  {
    const NoiseBlock b = noise_block(gamma, h - t_prev);
    NoisePair seg = draw_noise_pair(b, dim, rng);
    out.seed_path.push_back(seg);
    prefix = compose_noise(prefix, seg, gamma);
  }
  out.xi1_full = prefix.xi1;
  out.xi2_full = prefix.xi2;
  return out;
}

}  // namespace uld
