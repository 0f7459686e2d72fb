#include "uld/selftest.hpp"

#include <algorithm>
#include <cmath>

#include "uld/gaussian_oracle.hpp"
#include "uld/midpoint.hpp"
#include "uld/ou_kernels.hpp"
#include "uld/ou_noise.hpp"
#include "uld/quadrature.hpp"

namespace uld {
namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Ito-isometry integrands over [0, dt]; pointwise expm1 keeps them stable.
double kernel_a(double gamma, double upper, double s) { return ou_c1(gamma, upper - s); }
double kernel_b(double gamma, double upper, double s) { return ou_decay(gamma, upper - s); }

double ito_var_x(double gamma, double dt) {
  return 2.0 * gamma *
         adaptive_simpson([&](double s) { return std::pow(kernel_a(gamma, dt, s), 2); }, 0.0, dt,
                          0.0, 1e-13);
}
double ito_var_p(double gamma, double dt) {
  return 2.0 * gamma *
         adaptive_simpson([&](double s) { return std::pow(kernel_b(gamma, dt, s), 2); }, 0.0, dt,
                          0.0, 1e-13);
}
double ito_cov_xp(double gamma, double dt) {
  return 2.0 * gamma *
         adaptive_simpson(
             [&](double s) { return kernel_a(gamma, dt, s) * kernel_b(gamma, dt, s); }, 0.0, dt,
             0.0, 1e-13);
}

}  // namespace

NoiseSelftestReport noise_selftest(long mc_draws, std::uint64_t seed) {
  NoiseSelftestReport rep;

  const double gammas[] = {0.1, 1.0, std::sqrt(32.0), 10.0};
  const double dts[] = {1e-6, 1e-3, 0.1, 1.0};
  for (double g : gammas) {
    for (double dt : dts) {
      const NoiseBlock b = noise_block(g, dt);
      NoiseSelftestReport::MomentRow row;
      row.gamma = g;
      row.dt = dt;
      row.rel_var_x = rel_err(b.var_x, ito_var_x(g, dt));
      row.rel_var_p = rel_err(b.var_p, ito_var_p(g, dt));
      row.rel_cov_xp = rel_err(b.cov_xp, ito_cov_xp(g, dt));
      rep.max_moment_rel_err = std::max(
          {rep.max_moment_rel_err, row.rel_var_x, row.rel_var_p, row.rel_cov_xp});
      rep.moments.push_back(row);
    }
  }

  // Exact 4x4 covariance propagation through the composition map versus the
  // closed form over the joint interval, worst entry over a small grid.
  for (double g : {0.3, 1.0, std::sqrt(32.0)}) {
    for (auto [dt1, dt2] : {std::pair{0.05, 0.02}, std::pair{1e-4, 0.3}, std::pair{0.7, 0.7}}) {
      const NoiseBlock b1 = noise_block(g, dt1), b2 = noise_block(g, dt2);
      const double c1 = ou_c1(g, dt2), e2 = ou_decay(g, dt2);
      // [xi1; xi2]_{0,T} = [[1, c1],[0, e2]] [xi1; xi2]_{0,dt1} + [xi1; xi2]_{dt1,dt2}
      const double vx = b1.var_x + 2.0 * c1 * b1.cov_xp + c1 * c1 * b1.var_p + b2.var_x;
      const double cxp = e2 * (b1.cov_xp + c1 * b1.var_p) + b2.cov_xp;
      const double vp = e2 * e2 * b1.var_p + b2.var_p;
      const NoiseBlock whole = noise_block(g, dt1 + dt2);
      rep.composition_max_abs_err =
          std::max({rep.composition_max_abs_err, std::abs(vx - whole.var_x),
                    std::abs(cxp - whole.cov_xp), std::abs(vp - whole.var_p)});
    }
  }

  // Monte Carlo joint covariance of (xi1 at h/2, xi1 at h, xi2 at h) against
  // the cross-term quadrature oracle.
  {
    const double g = 1.3, h = 0.8, t = 0.5 * h;
    RngStream rng(seed);
    double s11 = 0, s12 = 0, s13 = 0, s22 = 0, s23 = 0, s33 = 0;
    for (long i = 0; i < mc_draws; ++i) {
      const StepNoiseDraw d = draw_step_noise(g, h, {t}, 1, rng);
      const double a = d.xi1_at.at(t)[0], b = d.xi1_full[0], c = d.xi2_full[0];
      s11 += a * a;
      s12 += a * b;
      s13 += a * c;
      s22 += b * b;
      s23 += b * c;
      s33 += c * c;
    }
    const double n = static_cast<double>(mc_draws);
    const double cov12 = 2.0 * g *
                         adaptive_simpson(
                             [&](double s) { return kernel_a(g, t, s) * kernel_a(g, h, s); }, 0.0,
                             t, 0.0, 1e-13);
    const double cov13 = 2.0 * g *
                         adaptive_simpson(
                             [&](double s) { return kernel_a(g, t, s) * kernel_b(g, h, s); }, 0.0,
                             t, 0.0, 1e-13);
    const NoiseBlock bh = noise_block(g, h);
    const double v1 = ito_var_x(g, t), v2 = bh.var_x, v3 = bh.var_p;
    // For jointly Gaussian (A, B), Var(AB) = Var(A) Var(B) + Cov(A, B)^2.
    struct Want {
      const char* name;
      double mc;
      double oracle;
      double prod_var;
    } wants[] = {
        {"var_xi1_half", s11 / n, v1, 2.0 * v1 * v1},
        {"cov_xi1half_xi1full", s12 / n, cov12, v1 * v2 + cov12 * cov12},
        {"cov_xi1half_xi2full", s13 / n, cov13, v1 * v3 + cov13 * cov13},
        {"var_xi1_full", s22 / n, v2, 2.0 * v2 * v2},
        {"cov_xi1_xi2_full", s23 / n, bh.cov_xp, v2 * v3 + bh.cov_xp * bh.cov_xp},
        {"var_xi2_full", s33 / n, v3, 2.0 * v3 * v3},
    };
    for (const Want& w : wants) {
      NoiseSelftestReport::JointRow jr;
      jr.entry = w.name;
      jr.mc_value = w.mc;
      jr.oracle_value = w.oracle;
      jr.se = std::max(std::sqrt(w.prod_var / n), 1e-300);
      jr.deviation_in_se = std::abs(w.mc - w.oracle) / jr.se;
      rep.joint_max_dev_se = std::max(rep.joint_max_dev_se, jr.deviation_in_se);
      rep.joint.push_back(jr);
    }
  }

  rep.pass = rep.max_moment_rel_err <= 1e-10 && rep.composition_max_abs_err <= 1e-12 &&
             rep.joint_max_dev_se <= 5.0;
  return rep;
}

MidpointSelftestReport midpoint_selftest(long n_draws, std::uint64_t seed) {
  MidpointSelftestReport rep;
  const double zs[] = {1e-6, 0.1, 1.0, 10.0};
  const double threshold = 1.63 / std::sqrt(static_cast<double>(n_draws));

  for (double z : zs) {
    const MidpointLaw law(1.0, z);  // gamma*h is all that matters
    RngStream rng = RngStream::derive(seed, {0xD0, static_cast<std::uint64_t>(z * 1e7)});
    std::vector<double> us(n_draws), vs(n_draws);
    for (long i = 0; i < n_draws; ++i) {
      us[i] = law.sample_u(rng);
      vs[i] = law.sample_v(rng);
    }
    std::sort(us.begin(), us.end());
    std::sort(vs.begin(), vs.end());
    double ks_u = 0.0, ks_v = 0.0;
    for (long i = 0; i < n_draws; ++i) {
      const double fe_lo = static_cast<double>(i) / n_draws;
      const double fe_hi = static_cast<double>(i + 1) / n_draws;
      ks_u = std::max({ks_u, std::abs(law.cdf_u(us[i]) - fe_lo), std::abs(law.cdf_u(us[i]) - fe_hi)});
      ks_v = std::max({ks_v, std::abs(law.cdf_v(vs[i]) - fe_lo), std::abs(law.cdf_v(vs[i]) - fe_hi)});
    }
    rep.ks.push_back({z, ks_u, ks_v, threshold});

    struct G {
      const char* name;
      double (*fn)(double);
    } gs[] = {
        {"1", [](double) { return 1.0; }},
        {"s", [](double s) { return s; }},
        {"s^2", [](double s) { return s * s; }},
        {"e^s", [](double s) { return std::exp(s); }},
    };
    for (const G& g : gs) {
      const UnbiasednessReport u = unbiasedness_weights_check(law, g.fn, rep.identity_tol);
      rep.identities.push_back({z, g.name, u.residual_u, u.residual_v});
    }
  }

  bool ok = true;
  for (const auto& k : rep.ks) ok = ok && k.ks_u < k.threshold && k.ks_v < k.threshold;
  for (const auto& idr : rep.identities)
    ok = ok && idr.residual_u <= rep.identity_tol && idr.residual_v <= rep.identity_tol;
  rep.pass = ok;
  return rep;
}

OracleSelftestReport oracle_selftest() {
  OracleSelftestReport rep;

  {  // KL(N(0,1) || N(0,e)) = 1/(2e)
    GaussianLaw p{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    GaussianLaw q{Eigen::VectorXd::Zero(1),
                  Eigen::MatrixXd::Identity(1, 1) * std::exp(1.0)};
    rep.kl_spot_err = std::abs(kl_gaussian(p, q) - 0.5 / std::exp(1.0));
  }
  {  // 1-d W2 between N(0,1) and N(0,4) is |1 - 2| = 1
    GaussianLaw p{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
    GaussianLaw q{Eigen::VectorXd::Zero(1), 4.0 * Eigen::MatrixXd::Identity(1, 1)};
    rep.w2_spot_err = std::abs(w2_gaussian(p, q) - 1.0);
  }
  {
    const double gamma = std::sqrt(32.0), h = 0.05;
    Eigen::VectorXd diag(4);
    diag << 0.5, 1.0, 2.0, 4.0;
    const SpdMatrix s = SpdMatrix::Diagonal(diag);
    const AffineStepMap map = ulmc_affine_map(s, gamma, h);
    const GaussianLaw fp = fixed_point_law(map);
    // Route 2: per-mode direct 3x3 solves.
    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const ModeCov mc = mode_fixed_point(ulmc_mode_map(diag[i], gamma, h));
      err = std::max({err, std::abs(fp.cov(i, i) - mc.xx), std::abs(fp.cov(i, 4 + i) - mc.xp),
                      std::abs(fp.cov(4 + i, 4 + i) - mc.pp)});
    }
    rep.fixed_point_route_err = err;

    // Dense law propagation vs per-mode squaring after 37 steps.
    const GaussianLaw after = law_after_steps(map, Eigen::VectorXd::Zero(8), 37);
    double err2 = 0.0;
    for (int i = 0; i < 4; ++i) {
      const ModeCov mc = mode_law_cov(ulmc_mode_map(diag[i], gamma, h), 37);
      err2 = std::max({err2, std::abs(after.cov(i, i) - mc.xx),
                       std::abs(after.cov(i, 4 + i) - mc.xp),
                       std::abs(after.cov(4 + i, 4 + i) - mc.pp)});
    }
    rep.dense_mode_err = err2;
  }

  rep.pass = rep.kl_spot_err < 1e-12 && rep.w2_spot_err < 1e-10 &&
             rep.fixed_point_route_err < 1e-10 && rep.dense_mode_err < 1e-12;
  return rep;
}

}  // namespace uld
