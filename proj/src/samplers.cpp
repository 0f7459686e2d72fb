#include "uld/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "uld/errors.hpp"
#include "uld/ou_kernels.hpp"

namespace uld {

const char* scheme_name(SchemeKind s) {
  switch (s) {
    case SchemeKind::kUlmc: return "ULMC";
    case SchemeKind::kRmd: return "RMD";
    case SchemeKind::kOlmc: return "OLMC";
    case SchemeKind::kReference: return "REFERENCE";
  }
  return "?";
}

StepCoefficients StepCoefficients::at(double gamma, double t) {
  StepCoefficients c;
  c.decay = ou_decay(gamma, t);
  c.c1 = ou_c1(gamma, t);
  c.c2 = ou_c2(gamma, t);
  return c;
}

namespace {

Eigen::VectorXd checked_gradient(const PotentialModel& model, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = model.gradient(x);
  if (!g.allFinite()) throw NumericalError("non-finite gradient");
  return g;
}

// xi^(1) restricted to [0, t]; endpoints handled so deduped or degenerate
// midpoint times (u, v in {0, 1}) cost nothing.
const Eigen::VectorXd xi1_at_time(const StepNoiseDraw& noise, double t, double h, int dim) {
  if (t <= 0.0) return Eigen::VectorXd::Zero(dim);
  if (t >= h) return noise.xi1_full;
  auto it = noise.xi1_at.find(t);
  if (it == noise.xi1_at.end())
    throw ContractError("rmd_step: noise draw is missing the intermediate time");
  return it->second;
}

}  // namespace

PhaseState ulmc_step(const PhaseState& state, const PotentialModel& model,
                     const StepCoefficients& coeffs, const Eigen::VectorXd& xi1,
                     const Eigen::VectorXd& xi2) {
  const Eigen::VectorXd grad = checked_gradient(model, state.x);
  PhaseState out;
  out.x = state.x + coeffs.c1 * state.p + xi1 - coeffs.c2 * grad;
  out.p = coeffs.decay * state.p + xi2 - coeffs.c1 * grad;
  return out;
}

PhaseState rmd_step(const PhaseState& state, const PotentialModel& model, double gamma, double h,
                    const MidpointPair& midpoint, const StepNoiseDraw& noise,
                    RmdMomentumMode momentum_mode) {
  const int dim = model.dim();
  const double tu = midpoint.u * h;
  const double tv = midpoint.v * h;
  const StepCoefficients full = StepCoefficients::at(gamma, h);
  const Eigen::VectorXd grad0 = checked_gradient(model, state.x);

  const double mom_u = momentum_mode == RmdMomentumMode::kFullStep ? full.c1 : ou_c1(gamma, tu);
  const double mom_v = momentum_mode == RmdMomentumMode::kFullStep ? full.c1 : ou_c1(gamma, tv);

  const Eigen::VectorXd xhat_u =
      state.x + mom_u * state.p + xi1_at_time(noise, tu, h, dim) - ou_c2(gamma, tu) * grad0;
  const Eigen::VectorXd xhat_v =
      state.x + mom_v * state.p + xi1_at_time(noise, tv, h, dim) - ou_c2(gamma, tv) * grad0;

  PhaseState out;
  out.x = state.x + full.c1 * state.p + noise.xi1_full - full.c2 * checked_gradient(model, xhat_u);
  out.p = full.decay * state.p + noise.xi2_full - full.c1 * checked_gradient(model, xhat_v);
  return out;
}

Eigen::VectorXd olmc_step(const Eigen::VectorXd& x, const PotentialModel& model, double h,
                          const Eigen::VectorXd& gaussian) {
  return x - h * checked_gradient(model, x) + std::sqrt(2.0 * h) * gaussian;
}

std::pair<PhaseState, StepNoiseDraw> reference_uld_step(
    const PhaseState& state, const PotentialModel& model, double gamma, double h, int substeps,
    const std::vector<double>& intermediate_times, RngStream& rng) {
  if (substeps < 1 || (substeps & (substeps - 1)) != 0)
    throw ContractError("reference_uld_step: substeps must be a power of two");

  std::vector<double> cuts = intermediate_times;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (double t : cuts)
    if (!(t > 0.0) || !(t < h)) throw ContractError("reference_uld_step: times must be in (0, h)");

  // Partition: uniform grid refined by the requested cut times.
  std::set<double> bounds(cuts.begin(), cuts.end());
  for (int j = 1; j < substeps; ++j) bounds.insert(h * j / substeps);
  bounds.insert(h);

  const int dim = model.dim();
  PhaseState cur = state;
  StepNoiseDraw draw;
  NoisePair prefix{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim), 0.0};

  double t_prev = 0.0;
  for (double t : bounds) {
    const double dt = t - t_prev;
    const NoiseBlock block = noise_block(gamma, dt);
    NoisePair seg = draw_noise_pair(block, dim, rng);
    cur = ulmc_step(cur, model, StepCoefficients::at(gamma, dt), seg.xi1, seg.xi2);
    prefix = compose_noise(prefix, seg, gamma);
    draw.seed_path.push_back(std::move(seg));
    if (std::binary_search(cuts.begin(), cuts.end(), t)) draw.xi1_at[t] = prefix.xi1;
    t_prev = t;
  }
  draw.xi1_full = prefix.xi1;
  draw.xi2_full = prefix.xi2;
  return {cur, std::move(draw)};
}

int choose_reference_substeps(const PhaseState& start, const PotentialModel& model, double gamma,
                              double h, double tol, int initial_substeps, RngStream& rng,
                              int probe_paths) {
  constexpr int kMaxSubsteps = 1 << 16;
  const int dim = model.dim();
  int k = std::max(1, initial_substeps);
  while (true) {
    double worst = 0.0;
    for (int path = 0; path < probe_paths; ++path) {
      // Draw at 2k, integrate fine; compose segment pairs for the k-level run
      // so both resolutions share the Brownian path.
      const double dt = h / (2 * k);
      const NoiseBlock block = noise_block(gamma, dt);
      const StepCoefficients fine_c = StepCoefficients::at(gamma, dt);
      const StepCoefficients coarse_c = StepCoefficients::at(gamma, 2.0 * dt);
      PhaseState fine = start, coarse = start;
      NoisePair pending;
      for (int j = 0; j < 2 * k; ++j) {
        NoisePair seg = draw_noise_pair(block, dim, rng);
        fine = ulmc_step(fine, model, fine_c, seg.xi1, seg.xi2);
        if (j % 2 == 0) {
          pending = std::move(seg);
        } else {
          const NoisePair merged = compose_noise(pending, seg, gamma);
          coarse = ulmc_step(coarse, model, coarse_c, merged.xi1, merged.xi2);
        }
      }
      worst = std::max(worst, std::sqrt((fine.x - coarse.x).squaredNorm() +
                                        (fine.p - coarse.p).squaredNorm()));
    }
    if (worst < tol) return 2 * k;
    if (2 * k >= kMaxSubsteps)
      throw NumericalError("choose_reference_substeps: tolerance unmet at 2^16 substeps");
    k *= 2;
  }
}

double ChainConfig::resolved_gamma(const PotentialModel& model) const {
  return gamma > 0.0 ? gamma : std::sqrt(32.0 * model.beta());
}

ChainResult run_chain(const ChainConfig& cfg, const PotentialModel& model,
                      const std::vector<ChainObserver*>& observers) {
  if (cfg.n_steps < 0) throw ContractError("run_chain: n_steps must be >= 0");
  if (cfg.n_steps > 0 && !(cfg.h > 0.0)) throw ContractError("run_chain: h must be > 0");
  const int dim = model.dim();
  if (cfg.init.x.size() != dim || cfg.init.p.size() != dim)
    throw ContractError("run_chain: init state dimension mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  ChainResult res;
  res.gamma_used = cfg.resolved_gamma(model);
  res.gamma_overridden =
      cfg.gamma > 0.0 && std::abs(cfg.gamma - std::sqrt(32.0 * model.beta())) >
                             1e-12 * std::sqrt(32.0 * model.beta());
  if (cfg.n_steps > 0 && cfg.h > 1.0 / std::sqrt(model.beta()))
    res.warnings.push_back("outside-lemma-regime: h > 1/sqrt(beta)");

  const double gamma = res.gamma_used;
  const StepCoefficients full = StepCoefficients::at(gamma, cfg.h);
  PhaseState state = cfg.init;

  enum : std::uint64_t { kBrownian = 1, kMidpoint = 2, kOlmc = 3 };

  for (long n = 0; n < cfg.n_steps; ++n) {
    SchemeKind effective = cfg.scheme;
    if (cfg.scheme == SchemeKind::kRmd && cfg.final_ulmc_step && n == cfg.n_steps - 1)
      effective = SchemeKind::kUlmc;
    try {
      switch (effective) {
        case SchemeKind::kUlmc: {
          RngStream rng = RngStream::derive(cfg.seed, {kBrownian, static_cast<std::uint64_t>(n)});
          const StepNoiseDraw noise = draw_step_noise(gamma, cfg.h, {}, dim, rng);
          state = ulmc_step(state, model, full, noise.xi1_full, noise.xi2_full);
          break;
        }
        case SchemeKind::kRmd: {
          RngStream mid_rng =
              RngStream::derive(cfg.seed, {kMidpoint, static_cast<std::uint64_t>(n)});
          const MidpointLaw law(gamma, cfg.h);
          const MidpointPair uv = sample_midpoint_pair(law, mid_rng);
          std::vector<double> times{uv.u * cfg.h, uv.v * cfg.h};
          std::sort(times.begin(), times.end());
          times.erase(std::unique(times.begin(), times.end()), times.end());
          std::erase_if(times, [&](double t) { return t <= 0.0 || t >= cfg.h; });
          RngStream rng = RngStream::derive(cfg.seed, {kBrownian, static_cast<std::uint64_t>(n)});
          const StepNoiseDraw noise = draw_step_noise(gamma, cfg.h, times, dim, rng);
          state = rmd_step(state, model, gamma, cfg.h, uv, noise, cfg.rmd_momentum);
          break;
        }
        case SchemeKind::kOlmc: {
          RngStream rng = RngStream::derive(cfg.seed, {kOlmc, static_cast<std::uint64_t>(n)});
          Eigen::VectorXd z(dim);
          for (int i = 0; i < dim; ++i) z[i] = rng.normal();
          state.x = olmc_step(state.x, model, cfg.h, z);
          break;
        }
        case SchemeKind::kReference: {
          RngStream rng = RngStream::derive(cfg.seed, {kBrownian, static_cast<std::uint64_t>(n)});
          state = reference_uld_step(state, model, gamma, cfg.h, cfg.ref_substeps, {}, rng).first;
          break;
        }
      }
    } catch (const NumericalError& e) {
      throw PoisonedStateError(e.what(), n);
    }
    if (!state.finite()) throw PoisonedStateError("non-finite state", n);
    res.step_log.push_back(effective);
    for (ChainObserver* obs : observers) obs->on_step(n, effective, state);
  }

  res.final_state = std::move(state);
  res.steps = cfg.n_steps;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

void TrajectoryRecorder::on_step(long step, SchemeKind scheme, const PhaseState& state) {
  Row r;
  r.step = step;
  r.scheme = scheme;
  r.x_norm = state.x.norm();
  r.p_norm = state.p.norm();
  if (record_full_state_) {
    r.x = state.x;
    r.p = state.p;
  }
  rows_.push_back(std::move(r));
}

std::string TrajectoryRecorder::to_jsonl() const {
  std::ostringstream os;
  os.precision(17);
  for (const Row& r : rows_) {
    os << "{\"step\":" << r.step << ",\"scheme\":\"" << scheme_name(r.scheme)
       << "\",\"x_norm\":" << r.x_norm << ",\"p_norm\":" << r.p_norm;
    if (record_full_state_) {
      os << ",\"x\":[";
      for (int i = 0; i < r.x.size(); ++i) os << (i ? "," : "") << r.x[i];
      os << "],\"p\":[";
      for (int i = 0; i < r.p.size(); ++i) os << (i ? "," : "") << r.p[i];
      os << "]";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace uld
