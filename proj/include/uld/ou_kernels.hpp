#pragma once

#include <cmath>

#include "uld/errors.hpp"

// Scalar kernels of the exactly-integrated Ornstein-Uhlenbeck part of the
// underdamped Langevin flow. Everything that suffers catastrophic cancellation
// for small gamma*t is computed by a convergent alternating series below
// z = 0.5 and by expm1-based closed forms above; the two branches overlap with
// ~1e-15 relative agreement at the switch point.

namespace uld {

inline constexpr double kSeriesSwitch = 0.5;

inline double ou_decay(double gamma, double t) { return std::exp(-gamma * t); }

// c1(t) = (1 - e^{-gamma t}) / gamma.  expm1 keeps this stable at all z.
inline double ou_c1(double gamma, double t) { return -std::expm1(-gamma * t) / gamma; }

// phi2(z) = 1 - (1 - e^{-z})/z = z/2 - z^2/6 + z^3/24 - ...
inline double ou_phi2(double z) {
  if (z < kSeriesSwitch) {
    double sum = 0.0, term = z / 2.0;
    for (int k = 1; k < 40; ++k) {
      sum += term;
      term *= -z / static_cast<double>(k + 2);
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return 1.0 + std::expm1(-z) / z;
}

// c2(t) = (t - c1(t)) / gamma, the position-drift weight on the frozen gradient.
inline double ou_c2(double gamma, double t) {
  if (t == 0.0) return 0.0;
  return (t / gamma) * ou_phi2(gamma * t);
}

// B(z) = z - 2(1 - e^{-z}) + (1 - e^{-2z})/2 = sum_{k>=3} (-1)^k (2 - 2^{k-1}) z^k / k!
// Governs Var xi^(1) = (2/gamma^2) B(gamma t).  Leading term z^3/3.
inline double ou_varx_bracket(double z) {
  if (z < kSeriesSwitch) {
    double sum = 0.0;
    double zk = z * z * z;  // z^3
    double kfact = 6.0;     // 3!
    double pow2 = 4.0;      // 2^{k-1} at k=3
    double sign = -1.0;     // (-1)^k at k=3
    for (int k = 3; k < 40; ++k) {
      const double term = sign * (2.0 - pow2) / kfact * zk;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      zk *= z;
      kfact *= static_cast<double>(k + 1);
      pow2 *= 2.0;
      sign = -sign;
    }
    return sum;
  }
  return z + 2.0 * std::expm1(-z) - 0.5 * std::expm1(-2.0 * z);
}

inline double ou_var_x(double gamma, double t) {
  if (t == 0.0) return 0.0;
  return (2.0 / (gamma * gamma)) * ou_varx_bracket(gamma * t);
}

// Cov(xi^(1), xi^(2)) = (1 - e^{-gamma t})^2 / gamma; square of an expm1 value,
// stable at every z.
inline double ou_cov_xp(double gamma, double t) {
  const double w = -std::expm1(-gamma * t);
  return w * w / gamma;
}

// Var xi^(2) = 1 - e^{-2 gamma t}.
inline double ou_var_p(double gamma, double t) { return -std::expm1(-2.0 * gamma * t); }

}  // namespace uld
