#include <algorithm>
#include <cmath>
#include <limits>

#include "uld/diagnostics.hpp"
#include "uld/errors.hpp"

namespace uld {

SlopeFit fit_loglog_slope(const std::vector<FitPoint>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const FitPoint& p : points) {
    if (p.flagged) continue;
    if (!(p.h > 0.0) || !(p.value > 0.0))
      throw ContractError("fit_loglog_slope: nonpositive point");
    xy.push_back({std::log(p.h), std::log(p.value)});
  }
  const int n = static_cast<int>(xy.size());
  if (n < 3) throw ContractError("fit_loglog_slope: fewer than 3 usable points");

  double mx = 0.0, my = 0.0;
  for (auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.points_used = n;
  const double intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (auto& [x, y] : xy) {
    const double r = y - (intercept + fit.slope * x);
    rss += r * r;
  }
  const double sigma2 = n > 2 ? rss / (n - 2) : 0.0;
  fit.half_width = 2.0 * std::sqrt(sigma2 / sxx);
  return fit;
}

// ---- concentration checks -----------------------------------------------------

namespace {

// log-MGF Monte Carlo with a batched bootstrap percentile CI (1000 resamples
// over 1000 equal batches). The log of a mean is biased; the bootstrap gives
// an interval without distributional assumptions.
ConcentrationReport log_mgf_report(const std::vector<double>& z_values, double lambda,
                                   double bound, double exact, std::uint64_t seed) {
  const long n = static_cast<long>(z_values.size());
  const int n_batches = 1000;
  const long per = std::max<long>(1, n / n_batches);
  std::vector<double> batch_means;
  double total = 0.0;
  long count = 0;
  double batch_sum = 0.0;
  long batch_count = 0;
  for (long i = 0; i < n; ++i) {
    const double e = std::exp(lambda * z_values[i]);
    total += e;
    ++count;
    batch_sum += e;
    if (++batch_count == per) {
      batch_means.push_back(batch_sum / per);
      batch_sum = 0.0;
      batch_count = 0;
    }
  }
  if (batch_count > 0) batch_means.push_back(batch_sum / batch_count);

  ConcentrationReport r;
  r.lambda = lambda;
  r.bound = bound;
  r.exact_log_mgf = exact;
  r.mc_log_mgf = std::log(total / count);

  RngStream rng(seed ^ 0x9e3779b9ULL);
  const int nb = static_cast<int>(batch_means.size());
  std::vector<double> boots(1000);
  for (int b = 0; b < 1000; ++b) {
    double s = 0.0;
    for (int k = 0; k < nb; ++k)
      s += batch_means[static_cast<int>(rng.uniform_open() * nb)];
    boots[b] = std::log(s / nb);
  }
  std::sort(boots.begin(), boots.end());
  r.ci_lo = boots[25];
  r.ci_hi = boots[974];
  double mean_b = 0.0;
  for (double b : boots) mean_b += b;
  mean_b /= boots.size();
  double var_b = 0.0;
  for (double b : boots) var_b += (b - mean_b) * (b - mean_b);
  r.boot_se = std::sqrt(var_b / (boots.size() - 1));

  const double half = 0.5 * (r.ci_hi - r.ci_lo);
  r.pass = r.ci_hi <= bound + 3.0 * half;
  r.cross_check_pass = std::abs(r.mc_log_mgf - exact) <= 5.0 * std::max(r.boot_se, 1e-300);
  return r;
}

double eigen_sum_log_mgf(const Eigen::VectorXd& eigs, double lambda) {
  double s = 0.0;
  for (double mu : eigs) {
    const double arg = 1.0 - 2.0 * lambda * mu;
    if (arg <= 0.0) throw NumericalError("log-MGF diverges: lambda too large for spectrum");
    s += -0.5 * std::log(arg);
  }
  return s;
}

}  // namespace

ConcentrationReport check_gradient_concentration(const PotentialModel& model, double lambda,
                                                 long n_samples, std::uint64_t seed) {
  const SpdMatrix* s = model.precision();
  if (s == nullptr || s->min_eigenvalue() <= 0.0)
    throw ContractError("check_gradient_concentration: needs a positive definite quadratic target");
  if (!(lambda > 0.0) || lambda > 1.0 / (4.0 * model.beta()) + 1e-15)
    throw ContractError("check_gradient_concentration: lambda must be in (0, 1/(4 beta)]");

  // x ~ N(minimizer, S^{-1}) => grad V = S (x - minimizer) ~ N(0, S).
  RngStream rng = RngStream::derive(seed, {0xC0, 0});
  std::vector<double> z(n_samples);
  for (long i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd x = model.minimizer() + s->sample_inverse_gaussian(rng);
    z[i] = model.gradient(x).squaredNorm();
  }
  const double bound = 2.0 * lambda * model.hessian_trace();
  const double exact = eigen_sum_log_mgf(s->eigenvalues(), lambda);
  return log_mgf_report(z, lambda, bound, exact, seed);
}

ConcentrationReport check_momentum_concentration(const PotentialModel& model, double lambda,
                                                 long n_samples, std::uint64_t seed) {
  const SpdMatrix& hb = model.hessian_bound();
  if (!(lambda > 0.0) || lambda >= 1.0 / (4.0 * model.beta()) + 1e-15)
    throw ContractError("check_momentum_concentration: lambda must be in (0, 1/(4 beta))");
  const double max_eig = hb.max_eigenvalue();
  if (max_eig > 0.0 && lambda >= 1.0 / (2.0 * max_eig))
    throw NumericalError("check_momentum_concentration: divergent MGF");

  RngStream rng = RngStream::derive(seed, {0xC1, 0});
  std::vector<double> z(n_samples);
  Eigen::VectorXd p(model.dim());
  for (long i = 0; i < n_samples; ++i) {
    for (int k = 0; k < model.dim(); ++k) p[k] = rng.normal();
    z[i] = hb.quadratic_form(p);
  }
  const double bound = 2.0 * lambda * hb.trace();
  const double exact = eigen_sum_log_mgf(hb.eigenvalues(), lambda);
  return log_mgf_report(z, lambda, bound, exact, seed);
}

// ---- dimension-free sweep -------------------------------------------------------

namespace {

double spectrum_trace(const SweepMember& m) {
  double t = 0.0;
  for (const auto& [s, c] : m.spectrum) t += s * static_cast<double>(c);
  return t;
}

double spectrum_beta(const SweepMember& m) {
  double b = 0.0;
  for (const auto& [s, c] : m.spectrum) b = std::max(b, s);
  return b;
}

double spectrum_alpha(const SweepMember& m) {
  double a = std::numeric_limits<double>::infinity();
  for (const auto& [s, c] : m.spectrum) a = std::min(a, s);
  return a;
}

long smallest_n_below(const std::vector<std::pair<double, long>>& spectrum, double gamma, double h,
                      double eps2, long n_cap) {
  long hi = 1;
  while (spectrum_kl_after_steps(spectrum, gamma, h, hi) > eps2) {
    hi *= 2;
    if (hi > n_cap) return -1;
  }
  long lo = hi / 2;  // kl(lo) > eps2 (or lo = 0)
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (spectrum_kl_after_steps(spectrum, gamma, h, mid) <= eps2)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace

SweepReport dimension_free_sweep(const std::vector<SweepMember>& family, double eps, double gamma,
                                 HRule h_rule, double prefactor, double fixed_h, long n_cap) {
  SweepReport report;
  const double eps2 = eps * eps;
  for (const SweepMember& m : family) {
    SweepRow row;
    row.dim = m.dim;
    const double tr = spectrum_trace(m);
    const double beta = spectrum_beta(m);
    const double alpha = spectrum_alpha(m);
    const double g = gamma > 0.0 ? gamma : std::sqrt(32.0 * beta);

    switch (h_rule) {
      case HRule::kTheoremUlmcSc: {
        if (!(alpha > 0.0)) {
          row.error = "strongly-convex schedule requires alpha > 0";
          report.rows.push_back(row);
          continue;
        }
        const double kappa = beta / alpha;
        row.h = prefactor * eps / (kappa * std::sqrt(tr));
        row.eps_in_range = eps <= std::sqrt(tr / beta / kappa);
        break;
      }
      case HRule::kTheoremRmdSc: {
        if (!(alpha > 0.0)) {
          row.error = "strongly-convex schedule requires alpha > 0";
          report.rows.push_back(row);
          continue;
        }
        const double kappa = beta / alpha;
        row.h = prefactor * std::pow(beta, -1.0 / 6.0) * std::pow(tr, -1.0 / 3.0) *
                std::pow(eps, 2.0 / 3.0);
        row.eps_in_range = eps <= std::sqrt(tr) * std::pow(beta, -1.5) * std::pow(kappa, -0.75);
        break;
      }
      case HRule::kFixed:
        row.h = fixed_h;
        break;
    }
    if (!(row.h > 0.0)) {
      row.error = "schedule produced nonpositive h";
      report.rows.push_back(row);
      continue;
    }

    try {
      const double stat_kl = spectrum_stationary_kl(m.spectrum, g, row.h);
      if (stat_kl > eps2) {
        row.error = "stationary KL exceeds target at this h";
        report.rows.push_back(row);
        continue;
      }
      row.n = smallest_n_below(m.spectrum, g, row.h, eps2, n_cap);
      if (row.n < 0) {
        row.error = "N cap exceeded";
      } else {
        row.kl_achieved = spectrum_kl_after_steps(m.spectrum, g, row.h, row.n);
      }
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
    report.rows.push_back(row);
  }
  return report;
}

double SweepReport::max_over_min_n() const {
  long lo = std::numeric_limits<long>::max(), hi = 0;
  for (const SweepRow& r : rows) {
    if (r.n <= 0) continue;
    lo = std::min(lo, r.n);
    hi = std::max(hi, r.n);
  }
  if (hi == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(hi) / static_cast<double>(lo);
}

SlopeFit SweepReport::logn_logd_slope() const {
  std::vector<FitPoint> pts;
  for (const SweepRow& r : rows) {
    if (r.n <= 0) continue;
    FitPoint p;
    p.h = static_cast<double>(r.dim);
    p.value = static_cast<double>(r.n);
    pts.push_back(p);
  }
  return fit_loglog_slope(pts);
}

}  // namespace uld
