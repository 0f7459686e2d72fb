#include "uld/gaussian_oracle.hpp"

#include <cmath>
#include <limits>

#include "uld/errors.hpp"
#include "uld/ou_kernels.hpp"

namespace uld {

AffineStepMap ulmc_affine_map(const SpdMatrix& precision, double gamma, double h) {
  const int d = precision.dim();
  const double decay = ou_decay(gamma, h);
  const double c1 = ou_c1(gamma, h);
  const double c2 = ou_c2(gamma, h);
  const Eigen::MatrixXd s = precision.dense();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);

  AffineStepMap map;
  map.A.resize(2 * d, 2 * d);
  map.A.topLeftCorner(d, d) = id - c2 * s;
  map.A.topRightCorner(d, d) = c1 * id;
  map.A.bottomLeftCorner(d, d) = -c1 * s;
  map.A.bottomRightCorner(d, d) = decay * id;

  map.noise_cov = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  map.noise_cov.topLeftCorner(d, d) = ou_var_x(gamma, h) * id;
  map.noise_cov.topRightCorner(d, d) = ou_cov_xp(gamma, h) * id;
  map.noise_cov.bottomLeftCorner(d, d) = ou_cov_xp(gamma, h) * id;
  map.noise_cov.bottomRightCorner(d, d) = ou_var_p(gamma, h) * id;

  const double min_eig = precision.min_eigenvalue();
  map.stationary_trace_hint =
      min_eig > 0.0 ? precision.eigenvalues().cwiseInverse().sum() + d
                    : std::numeric_limits<double>::infinity();
  return map;
}

GaussianLaw propagate_law(GaussianLaw law, const AffineStepMap& map, long n) {
  if (law.mean.size() != map.A.rows()) throw ContractError("propagate_law: dimension mismatch");
  for (long i = 0; i < n; ++i) {
    law.mean = map.A * law.mean;
    law.cov = map.A * law.cov * map.A.transpose() + map.noise_cov;
    law.cov = 0.5 * (law.cov + law.cov.transpose());
    if (std::isfinite(map.stationary_trace_hint) &&
        law.cov.trace() > 1e12 * map.stationary_trace_hint)
      throw NumericalError("propagate_law: instability, step size outside stable region");
  }
  return law;
}

GaussianLaw law_after_steps(const AffineStepMap& map, const Eigen::VectorXd& start, long n) {
  // (A_n, S_n): z_n = A_n z_0 + N(0, S_n); compose by binary decomposition.
  const long dim = map.A.rows();
  Eigen::MatrixXd a_acc, s_acc;
  Eigen::MatrixXd a_pow = map.A, s_pow = map.noise_cov;
  bool have = false;
  long k = n;
  while (k > 0) {
    if (k & 1) {
      if (!have) {
        a_acc = a_pow;
        s_acc = s_pow;
        have = true;
      } else {
        s_acc = a_pow * s_acc * a_pow.transpose() + s_pow;
        a_acc = a_pow * a_acc;
      }
    }
    k >>= 1;
    if (k > 0) {
      s_pow = a_pow * s_pow * a_pow.transpose() + s_pow;
      s_pow = 0.5 * (s_pow + s_pow.transpose());
      a_pow = a_pow * a_pow;
    }
  }
  GaussianLaw out;
  if (!have) {
    out.mean = start;
    out.cov = Eigen::MatrixXd::Zero(dim, dim);
  } else {
    out.mean = a_acc * start;
    out.cov = 0.5 * (s_acc + s_acc.transpose());
  }
  return out;
}

GaussianLaw fixed_point_law(const AffineStepMap& map) {
  const long dim = map.A.rows();
  Eigen::MatrixXd a = map.A, s = map.noise_cov;
  for (int it = 0; it < 200; ++it) {
    Eigen::MatrixXd s_next = a * s * a.transpose() + s;
    s_next = 0.5 * (s_next + s_next.transpose());
    a = a * a;
    const double rel = (s_next - s).norm() / std::max(s_next.norm(), 1e-300);
    s = std::move(s_next);
    if (rel < 1e-13 && it > 2) {
      GaussianLaw out;
      out.mean = Eigen::VectorXd::Zero(dim);
      out.cov = s;
      return out;
    }
    if (std::isfinite(map.stationary_trace_hint) && s.trace() > 1e12 * map.stationary_trace_hint)
      throw NumericalError("fixed_point_law: instability, step size outside stable region");
  }
  throw NumericalError("fixed_point_law: no convergence");
}

GaussianLaw stationary_phase_law(const SpdMatrix& precision, const Eigen::VectorXd& minimizer) {
  const int d = precision.dim();
  if (precision.min_eigenvalue() <= 0.0)
    throw NumericalError("stationary_phase_law: precision must be positive definite");
  GaussianLaw law;
  law.mean = Eigen::VectorXd::Zero(2 * d);
  law.mean.head(d) = minimizer;
  law.cov = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  law.cov.topLeftCorner(d, d) = precision.dense().llt().solve(Eigen::MatrixXd::Identity(d, d));
  law.cov.bottomRightCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  return law;
}

double kl_gaussian(const GaussianLaw& p, const GaussianLaw& q) {
  const long k = p.mean.size();
  if (q.mean.size() != k) throw ContractError("kl_gaussian: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> lq(q.cov);
  if (lq.info() != Eigen::Success) throw NumericalError("kl_gaussian: singular q covariance");

  Eigen::LLT<Eigen::MatrixXd> lp(p.cov);
  if (lp.info() != Eigen::Success) return std::numeric_limits<double>::infinity();

  double logdet_q = 0.0, logdet_p = 0.0;
  for (long i = 0; i < k; ++i) {
    logdet_q += 2.0 * std::log(lq.matrixL()(i, i));
    logdet_p += 2.0 * std::log(lp.matrixL()(i, i));
  }
  const Eigen::VectorXd dm = q.mean - p.mean;
  const double trace_term = lq.solve(p.cov).trace();
  const double maha = dm.dot(lq.solve(dm));
  const double kl = 0.5 * (trace_term - static_cast<double>(k) + maha + logdet_q - logdet_p);
  return std::max(kl, 0.0);
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-9 * scale)
    throw NumericalError("psd_sqrt: indefinite input");
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double w2_gaussian(const GaussianLaw& p, const GaussianLaw& q) {
  const Eigen::MatrixXd rq = psd_sqrt(q.cov);
  const Eigen::MatrixXd cross = psd_sqrt(rq * p.cov * rq);
  const double w2sq =
      (p.mean - q.mean).squaredNorm() + p.cov.trace() + q.cov.trace() - 2.0 * cross.trace();
  return std::sqrt(std::max(w2sq, 0.0));
}

// ---- per-eigenvalue fast path ----------------------------------------------

ModeStepMap ulmc_mode_map(double curvature, double gamma, double h) {
  ModeStepMap m;
  const double c1 = ou_c1(gamma, h), c2 = ou_c2(gamma, h);
  m.a11 = 1.0 - c2 * curvature;
  m.a12 = c1;
  m.a21 = -c1 * curvature;
  m.a22 = ou_decay(gamma, h);
  m.qxx = ou_var_x(gamma, h);
  m.qxp = ou_cov_xp(gamma, h);
  m.qpp = ou_var_p(gamma, h);
  return m;
}

double mode_spectral_radius(const ModeStepMap& m) {
  const double tr = m.a11 + m.a22, det = m.a11 * m.a22 - m.a12 * m.a21;
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0.0) return std::sqrt(std::abs(det));
  const double r = std::sqrt(disc);
  return std::max(std::abs((tr + r) / 2.0), std::abs((tr - r) / 2.0));
}

namespace {

ModeCov mode_step_cov(const ModeStepMap& m, const ModeCov& s) {
  // S' = A S A^T + Q on the 2x2 symmetric representation.
  ModeCov out;
  out.xx = m.a11 * (m.a11 * s.xx + m.a12 * s.xp) + m.a12 * (m.a11 * s.xp + m.a12 * s.pp) + m.qxx;
  out.xp = m.a21 * (m.a11 * s.xx + m.a12 * s.xp) + m.a22 * (m.a11 * s.xp + m.a12 * s.pp) + m.qxp;
  out.pp = m.a21 * (m.a21 * s.xx + m.a22 * s.xp) + m.a22 * (m.a21 * s.xp + m.a22 * s.pp) + m.qpp;
  return out;
}

ModeStepMap mode_square(const ModeStepMap& m) {
  ModeStepMap out;
  out.a11 = m.a11 * m.a11 + m.a12 * m.a21;
  out.a12 = m.a11 * m.a12 + m.a12 * m.a22;
  out.a21 = m.a21 * m.a11 + m.a22 * m.a21;
  out.a22 = m.a21 * m.a12 + m.a22 * m.a22;
  const ModeCov q = mode_step_cov(m, ModeCov{m.qxx, m.qxp, m.qpp});
  out.qxx = q.xx;
  out.qxp = q.xp;
  out.qpp = q.pp;
  return out;
}

ModeCov mode_apply(const ModeStepMap& block, const ModeCov& s) {
  ModeCov out = mode_step_cov(block, s);
  return out;
}

}  // namespace

ModeCov mode_law_cov(const ModeStepMap& m, long n) {
  ModeCov acc;
  ModeStepMap pow = m;
  bool have = false;
  long k = n;
  while (k > 0) {
    if (k & 1) {
      if (!have) {
        acc = ModeCov{pow.qxx, pow.qxp, pow.qpp};
        have = true;
      } else {
        acc = mode_apply(pow, acc);
      }
    }
    k >>= 1;
    if (k > 0) pow = mode_square(pow);
  }
  return acc;
}

ModeCov mode_fixed_point(const ModeStepMap& m) {
  if (mode_spectral_radius(m) >= 1.0 - 1e-14)
    throw NumericalError("mode_fixed_point: unstable step map");
  // Unknowns (xx, xp, pp): (I - T) sigma = q with T the symmetric-pair map.
  Eigen::Matrix3d t;
  t << m.a11 * m.a11, 2.0 * m.a11 * m.a12, m.a12 * m.a12,  //
      m.a11 * m.a21, m.a11 * m.a22 + m.a12 * m.a21, m.a12 * m.a22,  //
      m.a21 * m.a21, 2.0 * m.a21 * m.a22, m.a22 * m.a22;
  Eigen::Vector3d q(m.qxx, m.qxp, m.qpp);
  const Eigen::Vector3d sol = (Eigen::Matrix3d::Identity() - t).fullPivLu().solve(q);
  return ModeCov{sol[0], sol[1], sol[2]};
}

double mode_kl_vs_target(const ModeCov& cov, double curvature) {
  // target N(0, diag(1/s, 1)); KL = 0.5 [tr(T^{-1} S) - 2 + ln det T - ln det S]
  const double det = cov.xx * cov.pp - cov.xp * cov.xp;
  if (det <= 0.0 || cov.xx <= 0.0) return std::numeric_limits<double>::infinity();
  const double trace_term = curvature * cov.xx + cov.pp;
  const double logdet_t = std::log(1.0 / curvature);
  return std::max(0.0, 0.5 * (trace_term - 2.0 + logdet_t - std::log(det)));
}

double spectrum_kl_after_steps(const std::vector<std::pair<double, long>>& spectrum, double gamma,
                               double h, long n) {
  double total = 0.0;
  for (const auto& [s, count] : spectrum) {
    const ModeStepMap m = ulmc_mode_map(s, gamma, h);
    total += static_cast<double>(count) * mode_kl_vs_target(mode_law_cov(m, n), s);
  }
  return total;
}

double spectrum_stationary_kl(const std::vector<std::pair<double, long>>& spectrum, double gamma,
                              double h) {
  double total = 0.0;
  for (const auto& [s, count] : spectrum) {
    const ModeStepMap m = ulmc_mode_map(s, gamma, h);
    total += static_cast<double>(count) * mode_kl_vs_target(mode_fixed_point(m), s);
  }
  return total;
}

}  // namespace uld
