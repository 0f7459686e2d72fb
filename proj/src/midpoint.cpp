#include "uld/midpoint.hpp"

#include <algorithm>
#include <cmath>

#include "uld/errors.hpp"
#include "uld/ou_kernels.hpp"
#include "uld/quadrature.hpp"

namespace uld {
namespace {

// Numerator of cdf_u scaled by 1/h:
//   N(s, z) = s - [e^{-z(1-s)} - e^{-z}] / z
// Convergent series sum_{k>=2} (-1)^k z^{k-1} (1 - (1-s)^k) / k! below the
// switch point; the expm1 form cancels badly there.
double cdf_u_numerator(double s, double z) {
  if (z < kSeriesSwitch) {
    const double w = 1.0 - s;
    double sum = 0.0;
    double zpow = z;      // z^{k-1} at k=2
    double kfact = 2.0;   // k!
    double wpow = w * w;  // w^k
    double sign = 1.0;    // (-1)^k at k=2
    for (int k = 2; k < 48; ++k) {
      const double term = sign * zpow * (1.0 - wpow) / kfact;
      sum += term;
      if (std::abs(term) < 1e-19 * std::abs(sum)) break;
      zpow *= z;
      kfact *= static_cast<double>(k + 1);
      wpow *= w;
      sign = -sign;
    }
    return sum;
  }
  return s - (std::expm1(-z * (1.0 - s)) - std::expm1(-z)) / z;
}

}  // namespace

MidpointLaw::MidpointLaw(double gamma, double h) : gamma_(gamma), h_(h), z_(gamma * h) {
  if (!(gamma > 0.0) || !(h > 0.0)) throw ContractError("MidpointLaw: gamma and h must be > 0");
}

double MidpointLaw::normalizer_u() const { return h_ * ou_phi2(z_); }

double MidpointLaw::normalizer_v() const { return -std::expm1(-z_); }

double MidpointLaw::density_u(double s) const { return -std::expm1(-z_ * (1.0 - s)) / ou_phi2(z_); }

double MidpointLaw::density_v(double s) const {
  return z_ * std::exp(-z_ * (1.0 - s)) / (-std::expm1(-z_));
}

double MidpointLaw::cdf_u(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return cdf_u_numerator(s, z_) / ou_phi2(z_);
}

double MidpointLaw::cdf_v(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return (std::expm1(-z_ * (1.0 - s)) - std::expm1(-z_)) / (-std::expm1(-z_));
}

double MidpointLaw::invert_cdf_v(double f) const {
  // e^{-z(1-v)} = e^{-z} + f (1 - e^{-z});  log1p keeps the tiny-z limit exact.
  const double v = 1.0 + std::log1p(std::expm1(-z_) * (1.0 - f)) / z_;
  return std::clamp(v, 1e-300, 1.0 - 1e-16);
}

double MidpointLaw::invert_cdf_u(double f) const {
  // Newton from the z->0 limit (cdf -> 2s - s^2, so s0 = 1 - sqrt(1-f)),
  // with a bisection bracket as safeguard.
  double lo = 0.0, hi = 1.0;
  double s = 1.0 - std::sqrt(1.0 - f);
  const double phi = ou_phi2(z_);
  for (int it = 0; it < 128; ++it) {
    const double resid = cdf_u_numerator(s, z_) / phi - f;
    if (std::abs(resid) <= 1e-12) return std::clamp(s, 1e-300, 1.0 - 1e-16);
    if (resid > 0.0)
      hi = s;
    else
      lo = s;
    const double pdf = -std::expm1(-z_ * (1.0 - s)) / phi;
    double next = s - resid / pdf;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  throw NumericalError("invert_cdf_u: iteration cap exceeded");
}

double MidpointLaw::sample_u(RngStream& rng) const { return invert_cdf_u(rng.uniform_open()); }

double MidpointLaw::sample_v(RngStream& rng) const { return invert_cdf_v(rng.uniform_open()); }

MidpointPair sample_midpoint_pair(const MidpointLaw& law, RngStream& rng) {
  MidpointPair p;
  p.u = law.sample_u(rng);
  p.v = law.sample_v(rng);
  return p;
}

UnbiasednessReport unbiasedness_weights_check(const MidpointLaw& law,
                                              const std::function<double(double)>& g,
                                              double quad_tol) {
  const double gamma = law.gamma(), h = law.h();
  UnbiasednessReport r;

  const double rel = std::min(1e-13, 0.01 * quad_tol);

  const double eu =
      adaptive_simpson([&](double u) { return g(u) * law.density_u(u); }, 0.0, 1.0, 0.0, rel);
  r.lhs_u = law.normalizer_u() / gamma * eu;
  r.rhs_u =
      adaptive_simpson([&](double s) { return ou_c1(gamma, h - s) * g(s / h); }, 0.0, h, 0.0, rel);
  r.residual_u = std::abs(r.lhs_u - r.rhs_u) / std::max({std::abs(r.lhs_u), std::abs(r.rhs_u), 1e-300});

  const double ev =
      adaptive_simpson([&](double v) { return g(v) * law.density_v(v); }, 0.0, 1.0, 0.0, rel);
  r.lhs_v = law.normalizer_v() / gamma * ev;
  r.rhs_v = adaptive_simpson([&](double s) { return ou_decay(gamma, h - s) * g(s / h); }, 0.0, h,
                             0.0, rel);
  r.residual_v = std::abs(r.lhs_v - r.rhs_v) / std::max({std::abs(r.lhs_v), std::abs(r.rhs_v), 1e-300});

  r.pass = r.residual_u <= quad_tol && r.residual_v <= quad_tol;
  return r;
}

}  // namespace uld
