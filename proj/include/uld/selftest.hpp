#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uld {

// Validation of the closed-form noise moments against direct quadrature of the
// Ito-isometry integrals, exact covariance propagation through the composition
// map, and a Monte Carlo check of the joint midpoint-restricted covariance
// against cross-term quadrature.
struct NoiseSelftestReport {
  struct MomentRow {
    double gamma, dt;
    double rel_var_x, rel_var_p, rel_cov_xp;
  };
  std::vector<MomentRow> moments;
  double max_moment_rel_err = 0.0;

  double composition_max_abs_err = 0.0;  // exact 4x4 propagation vs closed form

  struct JointRow {
    std::string entry;
    double mc_value, oracle_value, se, deviation_in_se;
  };
  std::vector<JointRow> joint;  // (xi1 at h/2, xi1 at h, xi2 at h) covariance
  double joint_max_dev_se = 0.0;

  bool pass = false;
};

NoiseSelftestReport noise_selftest(long mc_draws, std::uint64_t seed);

// Kolmogorov-Smirnov distance of inverse-CDF draws against the analytic CDFs
// plus quadrature verification of the randomization identities.
struct MidpointSelftestReport {
  struct KsRow {
    double gamma_h;
    double ks_u, ks_v, threshold;
  };
  std::vector<KsRow> ks;

  struct IdentityRow {
    double gamma_h;
    std::string g;
    double residual_u, residual_v;
  };
  std::vector<IdentityRow> identities;
  double identity_tol = 1e-10;

  bool pass = false;
};

MidpointSelftestReport midpoint_selftest(long n_draws, std::uint64_t seed);

// Spot checks of the Gaussian-law machinery: closed-form KL/W2 values, the
// two fixed-point routes, and dense-vs-mode equivalence.
struct OracleSelftestReport {
  double kl_spot_err = 0.0;
  double w2_spot_err = 0.0;
  double fixed_point_route_err = 0.0;
  double dense_mode_err = 0.0;
  bool pass = false;
};

OracleSelftestReport oracle_selftest();

}  // namespace uld
