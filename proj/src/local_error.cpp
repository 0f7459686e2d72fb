#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <thread>

#include "uld/diagnostics.hpp"
#include "uld/errors.hpp"
#include "uld/ou_kernels.hpp"
#include "uld/quadrature.hpp"

namespace uld {
namespace {

enum : std::uint64_t { kUvStream = 11, kPathStream = 12 };

// ---- conditional prefix restriction of one cell ------------------------------
// Per coordinate, the prefix pair A over [0, tau] and the cell pair E over
// [0, dt] are jointly Gaussian with E = M_A A + B, B the independent tail and
// M_A = [[1, c1(dt - tau)], [0, e^{-gamma(dt - tau)}]]. Conditionally on E,
// A = R E + L z with regression R = S_A M_A^T S_E^{-1} and L the Cholesky
// factor of the residual covariance. Exact restriction of the shared Brownian
// path to an interior time without refining the integration grid.
struct PrefixSplit {
  double r11, r12, r21, r22;
  double l11, l21, l22;
};

PrefixSplit prefix_split_coeffs(double gamma, double dt, double tau) {
  const NoiseBlock a = noise_block(gamma, tau);
  const NoiseBlock e = noise_block(gamma, dt);
  const double rlen = dt - tau;
  const double m12 = ou_c1(gamma, rlen), m22 = ou_decay(gamma, rlen);

  const double c11 = a.var_x, c12 = a.var_x * m12 + a.cov_xp * m22;
  const double c21 = a.cov_xp, c22 = a.cov_xp * m12 + a.var_p * m22;
  const double det = e.var_x * e.var_p - e.cov_xp * e.cov_xp;
  const double i11 = e.var_p / det, i12 = -e.cov_xp / det, i22 = e.var_x / det;

  PrefixSplit s;
  s.r11 = c11 * i11 + c12 * i12;
  s.r12 = c11 * i12 + c12 * i22;
  s.r21 = c21 * i11 + c22 * i12;
  s.r22 = c21 * i12 + c22 * i22;

  double v11 = a.var_x - (s.r11 * c11 + s.r12 * c12);
  double v12 = a.cov_xp - (s.r11 * c21 + s.r12 * c22);
  double v22 = a.var_p - (s.r21 * c21 + s.r22 * c22);
  v11 = std::max(v11, 0.0);
  v22 = std::max(v22, 0.0);
  s.l11 = std::sqrt(v11);
  s.l21 = s.l11 > 0.0 ? v12 / s.l11 : 0.0;
  s.l22 = std::sqrt(std::max(v22 - s.l21 * s.l21, 0.0));
  return s;
}

struct CutDraw {
  double t = 0.0;
  int cell = 0;
  Eigen::VectorXd z1, z2;
};

// One repetition's sampled randomness; integrations run it at sign = +-1.
struct RepDraw {
  MidpointPair uv;
  std::vector<Eigen::VectorXd> cell_xi1, cell_xi2;
  std::vector<CutDraw> cuts;  // ascending in t
};

struct RepResult {
  Eigen::VectorXd dx_weak, dp_weak;  // coarse - extrapolated reference
  double dx2 = 0.0, dp2 = 0.0;       // squared norms vs fine reference
};

class LocalErrorRig {
 public:
  LocalErrorRig(const PotentialModel& model, double gamma, const PhaseState& start,
                const LocalErrorOptions& opts)
      : model_(model), gamma_(gamma), start_(start), opts_(opts), dim_(model.dim()) {
    if (opts.fine_substeps < 8 || (opts.fine_substeps & (opts.fine_substeps - 1)) != 0)
      throw ContractError("measure_local_error: fine_substeps must be a power of two >= 8");
  }

  void set_h(double h) {
    h_ = h;
    nseg_ = opts_.fine_substeps;
    dt_ = h / nseg_;
    block_ = noise_block(gamma_, dt_);
    for (int lv = 0; lv < 3; ++lv) {
      stride_[lv] = 1 << lv;
      level_coeffs_[lv] = StepCoefficients::at(gamma_, stride_[lv] * dt_);
    }
    cell_c1_ = ou_c1(gamma_, dt_);
    cell_decay_ = ou_decay(gamma_, dt_);
    full_ = StepCoefficients::at(gamma_, h);
    if (opts_.scheme == SchemeKind::kRmd) {
      law_.emplace(gamma_, h_);
      if (opts_.control_variate) cv_center_ = expected_zero_noise_map();
    }
  }

  void draw_rep(std::uint64_t seed, long rep, RepDraw& d) const {
    if (opts_.scheme == SchemeKind::kRmd) {
      RngStream uv = RngStream::derive(seed, {kUvStream, static_cast<std::uint64_t>(rep)});
      d.uv.u = law_->sample_u(uv);
      d.uv.v = law_->sample_v(uv);
    }
    RngStream path = RngStream::derive(seed, {kPathStream, static_cast<std::uint64_t>(rep)});
    d.cell_xi1.assign(nseg_, Eigen::VectorXd(dim_));
    d.cell_xi2.assign(nseg_, Eigen::VectorXd(dim_));
    for (int j = 0; j < nseg_; ++j) {
      for (int i = 0; i < dim_; ++i) {
        const double z1 = path.normal(), z2 = path.normal();
        d.cell_xi1[j][i] = block_.l11 * z1;
        d.cell_xi2[j][i] = block_.l21 * z1 + block_.l22 * z2;
      }
    }
    d.cuts.clear();
    if (opts_.scheme == SchemeKind::kRmd) {
      for (double t : {d.uv.u * h_, d.uv.v * h_}) {
        CutDraw c;
        c.t = t;
        c.cell = std::min(static_cast<int>(t / dt_), nseg_ - 1);
        c.z1.resize(dim_);
        c.z2.resize(dim_);
        for (int i = 0; i < dim_; ++i) {
          c.z1[i] = path.normal();
          c.z2[i] = path.normal();
        }
        d.cuts.push_back(std::move(c));
      }
      std::sort(d.cuts.begin(), d.cuts.end(),
                [](const CutDraw& a, const CutDraw& b) { return a.t < b.t; });
    }
  }

  // Coupled integration of the three reference levels plus the coarse scheme
  // on the stored draw at the given sign.
  void run_sign(const RepDraw& d, double sign, PhaseState& ref_fine, PhaseState& ref_extrap,
                PhaseState& coarse) const {
    PhaseState st[3] = {start_, start_, start_};
    Eigen::VectorXd p1[3], p2[3];
    for (int lv = 0; lv < 3; ++lv) {
      p1[lv] = Eigen::VectorXd::Zero(dim_);
      p2[lv] = Eigen::VectorXd::Zero(dim_);
    }
    Eigen::VectorXd acc1 = Eigen::VectorXd::Zero(dim_), acc2 = Eigen::VectorXd::Zero(dim_);
    std::map<double, Eigen::VectorXd> xi1_at;

    std::size_t ci = 0;
    for (int j = 0; j < nseg_; ++j) {
      const Eigen::VectorXd e1 = sign * d.cell_xi1[j];
      const Eigen::VectorXd e2 = sign * d.cell_xi2[j];

      // Cut restrictions for this cell, before the cell joins the prefix.
      // Same-cell cuts nest: the later prefix is drawn conditionally on the
      // cell, the earlier conditionally on the later.
      std::size_t ce = ci;
      while (ce < d.cuts.size() && d.cuts[ce].cell == j) ++ce;
      if (ce > ci) {
        Eigen::VectorXd whole1 = e1, whole2 = e2;
        double whole_len = dt_;
        std::vector<std::pair<double, std::pair<Eigen::VectorXd, Eigen::VectorXd>>> prefixes;
        for (std::size_t k = ce; k-- > ci;) {
          const CutDraw& cut = d.cuts[k];
          const double tau = cut.t - j * dt_;
          Eigen::VectorXd a1(dim_), a2(dim_);
          if (tau <= 0.0) {
            a1.setZero();
            a2.setZero();
          } else if (tau >= whole_len) {
            a1 = whole1;
            a2 = whole2;
          } else {
            const PrefixSplit s = prefix_split_coeffs(gamma_, whole_len, tau);
            for (int i = 0; i < dim_; ++i) {
              const double b1 = sign * cut.z1[i], b2 = sign * cut.z2[i];
              a1[i] = s.r11 * whole1[i] + s.r12 * whole2[i] + s.l11 * b1;
              a2[i] = s.r21 * whole1[i] + s.r22 * whole2[i] + s.l21 * b1 + s.l22 * b2;
            }
          }
          prefixes.push_back({cut.t, {a1, a2}});
          whole1 = a1;
          whole2 = a2;
          whole_len = tau;
        }
        for (auto& [t, ap] : prefixes) {
          const double tau = t - j * dt_;
          xi1_at[t] = acc1 + ou_c1(gamma_, tau) * acc2 + ap.first;
        }
        ci = ce;
      }

      // Compose the cell into every pending pair and the full accumulator.
      for (int lv = 0; lv < 3; ++lv) {
        p1[lv] += cell_c1_ * p2[lv] + e1;
        p2[lv] = cell_decay_ * p2[lv] + e2;
      }
      acc1 += cell_c1_ * acc2 + e1;
      acc2 = cell_decay_ * acc2 + e2;

      for (int lv = 0; lv < 3; ++lv) {
        if ((j + 1) % stride_[lv] == 0) {
          st[lv] = ulmc_step(st[lv], model_, level_coeffs_[lv], p1[lv], p2[lv]);
          p1[lv].setZero();
          p2[lv].setZero();
        }
      }
    }

    ref_fine = st[0];
    ref_extrap.x = (8.0 * st[0].x - 6.0 * st[1].x + st[2].x) / 3.0;
    ref_extrap.p = (8.0 * st[0].p - 6.0 * st[1].p + st[2].p) / 3.0;

    switch (opts_.scheme) {
      case SchemeKind::kUlmc:
        coarse = ulmc_step(start_, model_, full_, acc1, acc2);
        break;
      case SchemeKind::kRmd: {
        StepNoiseDraw noise;
        noise.xi1_full = acc1;
        noise.xi2_full = acc2;
        noise.xi1_at = std::move(xi1_at);
        coarse = rmd_step(start_, model_, gamma_, h_, d.uv, noise, opts_.momentum);
        break;
      }
      case SchemeKind::kReference:
        coarse = ref_fine;
        break;
      case SchemeKind::kOlmc:
        throw ContractError("measure_local_error: OLMC targets the overdamped flow");
    }
  }

  RepResult run_rep(const RepDraw& d) const {
    PhaseState rf, re, co;
    run_sign(d, 1.0, rf, re, co);
    RepResult r;
    r.dx_weak = co.x - re.x;
    r.dp_weak = co.p - re.p;
    r.dx2 = (co.x - rf.x).squaredNorm();
    r.dp2 = (co.p - rf.p).squaredNorm();
    if (opts_.antithetic) {
      PhaseState rf2, re2, co2;
      run_sign(d, -1.0, rf2, re2, co2);
      r.dx_weak = 0.5 * (r.dx_weak + (co2.x - re2.x));
      r.dp_weak = 0.5 * (r.dp_weak + (co2.p - re2.p));
      r.dx2 = 0.5 * (r.dx2 + (co2.x - rf2.x).squaredNorm());
      r.dp2 = 0.5 * (r.dp2 + (co2.p - rf2.p).squaredNorm());
    }
    if (opts_.scheme == SchemeKind::kRmd && opts_.control_variate) {
      // Zero-noise scheme output at the drawn (u, v), recentred by its exact
      // expectation; a mean-zero subtraction that soaks up the midpoint
      // randomness. Uses the real sampler on an all-zero draw.
      const PhaseState mm = zero_noise_map(d.uv);
      r.dx_weak -= mm.x - cv_center_->x;
      r.dp_weak -= mm.p - cv_center_->p;
    }
    return r;
  }

  PhaseState zero_noise_map(const MidpointPair& uv) const {
    StepNoiseDraw zero;
    zero.xi1_full = Eigen::VectorXd::Zero(dim_);
    zero.xi2_full = Eigen::VectorXd::Zero(dim_);
    zero.xi1_at[uv.u * h_] = Eigen::VectorXd::Zero(dim_);
    zero.xi1_at[uv.v * h_] = Eigen::VectorXd::Zero(dim_);
    return rmd_step(start_, model_, gamma_, h_, uv, zero, opts_.momentum);
  }

  // E_{u,v} of the zero-noise map: the x-part integrates over the u density,
  // the p-part over the v density (they enter separate update lines).
  PhaseState expected_zero_noise_map() const {
    const Eigen::VectorXd grad0 = model_.gradient(start_.x);
    auto predictor = [&](double t) {
      const double mom =
          opts_.momentum == RmdMomentumMode::kFullStep ? full_.c1 : ou_c1(gamma_, t);
      return Eigen::VectorXd(start_.x + mom * start_.p - ou_c2(gamma_, t) * grad0);
    };
    Eigen::VectorXd eu = Eigen::VectorXd::Zero(dim_);
    Eigen::VectorXd ev = Eigen::VectorXd::Zero(dim_);
    // 64-panel composite Gauss-Legendre; integrands are entire in u.
    for (int comp = 0; comp < dim_; ++comp) {
      eu[comp] = gauss_legendre(
          [&](double u) { return model_.gradient(predictor(u * h_))[comp] * law_->density_u(u); },
          0.0, 1.0, 64);
      ev[comp] = gauss_legendre(
          [&](double v) { return model_.gradient(predictor(v * h_))[comp] * law_->density_v(v); },
          0.0, 1.0, 64);
    }
    PhaseState out;
    out.x = start_.x + full_.c1 * start_.p - full_.c2 * eu;
    out.p = full_.decay * start_.p - full_.c1 * ev;
    return out;
  }

  int dim() const { return dim_; }

 private:
  const PotentialModel& model_;
  double gamma_;
  PhaseState start_;
  LocalErrorOptions opts_;
  int dim_;
  double h_ = 0.0, dt_ = 0.0;
  int nseg_ = 0;
  int stride_[3] = {1, 2, 4};
  NoiseBlock block_;
  StepCoefficients level_coeffs_[3];
  double cell_c1_ = 0.0, cell_decay_ = 1.0;
  StepCoefficients full_;
  std::optional<MidpointLaw> law_;
  std::optional<PhaseState> cv_center_;
};

struct BlockAccum {
  Eigen::VectorXd sum_dx, sum_dp;
  double sum_dx2 = 0.0, sum_dp2 = 0.0;
  long count = 0;
};

constexpr long kBlockReps = 256;

}  // namespace

LocalErrorReport measure_local_error(const PotentialModel& model, double gamma,
                                     const std::vector<double>& h_grid, const PhaseState& start,
                                     const LocalErrorOptions& opts, std::uint64_t seed) {
  if (h_grid.empty()) throw ContractError("measure_local_error: empty h grid");
  const double beta = model.beta();
  for (double h : h_grid)
    if (!(h > 0.0) || h > 1.0 / std::sqrt(beta) + 1e-12)
      throw ContractError("measure_local_error: h grid must lie in (0, 1/sqrt(beta)]");

  const int dim = model.dim();
  const int n_h = static_cast<int>(h_grid.size());
  std::vector<std::vector<BlockAccum>> blocks(n_h);

  long reps_done = 0;
  long target = std::max<long>(opts.initial_reps, 1);

  while (true) {
    const long first_block = reps_done / kBlockReps;
    const long last_block = (target + kBlockReps - 1) / kBlockReps;
    for (int hi = 0; hi < n_h; ++hi) blocks[hi].resize(last_block);

    const int n_threads = std::max(1, opts.threads);
    std::atomic<long> next_block{first_block};
    auto worker = [&]() {
      LocalErrorRig rig(model, gamma, start, opts);
      RepDraw draw;
      for (long b = next_block.fetch_add(1); b < last_block; b = next_block.fetch_add(1)) {
        const long rep_lo = b * kBlockReps;
        const long rep_hi = std::min(target, rep_lo + kBlockReps);
        for (int hi = 0; hi < n_h; ++hi) {
          rig.set_h(h_grid[hi]);
          BlockAccum acc;
          acc.sum_dx = Eigen::VectorXd::Zero(dim);
          acc.sum_dp = Eigen::VectorXd::Zero(dim);
          for (long rep = rep_lo; rep < rep_hi; ++rep) {
            rig.draw_rep(seed, rep, draw);
            const RepResult r = rig.run_rep(draw);
            acc.sum_dx += r.dx_weak;
            acc.sum_dp += r.dp_weak;
            acc.sum_dx2 += r.dx2;
            acc.sum_dp2 += r.dp2;
            ++acc.count;
          }
          blocks[hi][b] = std::move(acc);
        }
      }
    };
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    reps_done = target;

    // Assemble the report (deterministic block order).
    LocalErrorReport report;
    report.points.assign(n_h, LocalErrorPoint{});
    bool need_more = false;
    for (int hi = 0; hi < n_h; ++hi) {
      LocalErrorPoint& pt = report.points[hi];
      pt.h = h_grid[hi];
      Eigen::VectorXd mean_dx = Eigen::VectorXd::Zero(dim), mean_dp = Eigen::VectorXd::Zero(dim);
      double sum_dx2 = 0.0, sum_dp2 = 0.0;
      long n = 0;
      for (const BlockAccum& b : blocks[hi]) {
        mean_dx += b.sum_dx;
        mean_dp += b.sum_dp;
        sum_dx2 += b.sum_dx2;
        sum_dp2 += b.sum_dp2;
        n += b.count;
      }
      pt.n_reps = n;
      mean_dx /= static_cast<double>(n);
      mean_dp /= static_cast<double>(n);
      pt.strong_x = std::sqrt(sum_dx2 / static_cast<double>(n));
      pt.strong_p = std::sqrt(sum_dp2 / static_cast<double>(n));
      pt.weak_x = mean_dx.norm();
      pt.weak_p = mean_dp.norm();

      // Standard errors from block means.
      const long nb = static_cast<long>(blocks[hi].size());
      double var_dx2 = 0.0, var_dp2 = 0.0;
      Eigen::VectorXd var_mx = Eigen::VectorXd::Zero(dim), var_mp = Eigen::VectorXd::Zero(dim);
      for (const BlockAccum& b : blocks[hi]) {
        if (b.count == 0) continue;
        const double c = static_cast<double>(b.count);
        var_dx2 += std::pow(b.sum_dx2 / c - sum_dx2 / n, 2);
        var_dp2 += std::pow(b.sum_dp2 / c - sum_dp2 / n, 2);
        var_mx += (b.sum_dx / c - mean_dx).cwiseAbs2();
        var_mp += (b.sum_dp / c - mean_dp).cwiseAbs2();
      }
      const double nbd = static_cast<double>(nb);
      const double se_msq_x = std::sqrt(var_dx2 / nbd / std::max(nbd - 1.0, 1.0));
      const double se_msq_p = std::sqrt(var_dp2 / nbd / std::max(nbd - 1.0, 1.0));
      pt.strong_x_se = pt.strong_x > 0.0 ? se_msq_x / (2.0 * pt.strong_x) : 0.0;
      pt.strong_p_se = pt.strong_p > 0.0 ? se_msq_p / (2.0 * pt.strong_p) : 0.0;
      pt.weak_x_se = std::sqrt(var_mx.sum() / nbd / std::max(nbd - 1.0, 1.0));
      pt.weak_p_se = std::sqrt(var_mp.sum() / nbd / std::max(nbd - 1.0, 1.0));

      pt.es_def = std::max(pt.strong_x / pt.h, pt.strong_p);
      pt.ew_def = std::max(pt.weak_x / pt.h, pt.weak_p);
      pt.strong_x_flagged = pt.strong_x_se > 0.3 * pt.strong_x;
      pt.strong_p_flagged = pt.strong_p_se > 0.3 * pt.strong_p;
      pt.weak_x_flagged = pt.weak_x_se > 0.3 * pt.weak_x;
      pt.weak_p_flagged = pt.weak_p_se > 0.3 * pt.weak_p;

      if (opts.adaptive && opts.scheme != SchemeKind::kReference) {
        if (pt.strong_x_se > opts.se_target * pt.strong_x ||
            pt.weak_x_se > opts.se_target * pt.weak_x)
          need_more = true;
      }
    }

    if (!need_more || reps_done >= opts.rep_cap) return report;
    target = std::min(opts.rep_cap, reps_done * 2);
  }
}

std::vector<FitPoint> LocalErrorReport::series(const std::string& name) const {
  std::vector<FitPoint> out;
  for (const LocalErrorPoint& p : points) {
    FitPoint f;
    f.h = p.h;
    if (name == "strong_x") {
      f.value = p.strong_x;
      f.se = p.strong_x_se;
      f.flagged = p.strong_x_flagged;
    } else if (name == "strong_p") {
      f.value = p.strong_p;
      f.se = p.strong_p_se;
      f.flagged = p.strong_p_flagged;
    } else if (name == "weak_x") {
      f.value = p.weak_x;
      f.se = p.weak_x_se;
      f.flagged = p.weak_x_flagged;
    } else if (name == "weak_p") {
      f.value = p.weak_p;
      f.se = p.weak_p_se;
      f.flagged = p.weak_p_flagged;
    } else {
      throw ContractError("LocalErrorReport::series: unknown series " + name);
    }
    out.push_back(f);
  }
  return out;
}

SlopeFit LocalErrorReport::fit(const std::string& name) const { return fit_loglog_slope(series(name)); }

// ---- exact one-step means on quadratic targets --------------------------------

PhaseState exact_flow_mean(const PotentialModel& model, double gamma, double h,
                           const PhaseState& start) {
  const SpdMatrix* s = model.precision();
  if (s == nullptr) throw ContractError("exact_flow_mean: quadratic target required");
  const int d = model.dim();
  Eigen::MatrixXd drift(2 * d, 2 * d);
  drift.setZero();
  drift.topRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  drift.bottomLeftCorner(d, d) = -s->dense();
  drift.bottomRightCorner(d, d) = -gamma * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd z(2 * d);
  z.head(d) = start.x - model.minimizer();
  z.tail(d) = start.p;
  const Eigen::VectorXd out = (drift * h).exp() * z;
  PhaseState res;
  res.x = out.head(d) + model.minimizer();
  res.p = out.tail(d);
  return res;
}

Eigen::VectorXd exact_one_step_mean_x(const PotentialModel& model, double gamma, double h,
                                      const PhaseState& start, SchemeKind scheme,
                                      RmdMomentumMode momentum) {
  const StepCoefficients full = StepCoefficients::at(gamma, h);
  const Eigen::VectorXd grad0 = model.gradient(start.x);
  switch (scheme) {
    case SchemeKind::kUlmc:
      return start.x + full.c1 * start.p - full.c2 * grad0;
    case SchemeKind::kRmd: {
      const MidpointLaw law(gamma, h);
      Eigen::VectorXd eu = Eigen::VectorXd::Zero(model.dim());
      for (int comp = 0; comp < model.dim(); ++comp) {
        eu[comp] = gauss_legendre(
            [&](double u) {
              const double t = u * h;
              const double mom =
                  momentum == RmdMomentumMode::kFullStep ? full.c1 : ou_c1(gamma, t);
              const Eigen::VectorXd xh =
                  start.x + mom * start.p - ou_c2(gamma, t) * grad0;
              return model.gradient(xh)[comp] * law.density_u(u);
            },
            0.0, 1.0, 64);
      }
      return start.x + full.c1 * start.p - full.c2 * eu;
    }
    default:
      throw ContractError("exact_one_step_mean_x: ULMC or RMD only");
  }
}

}  // namespace uld
