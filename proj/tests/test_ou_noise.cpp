#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <quadmath.h>

#include <cmath>

#include "uld/ou_kernels.hpp"
#include "uld/ou_noise.hpp"
#include "uld/quadrature.hpp"
#include "uld/selftest.hpp"

using namespace uld;

namespace {

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Quadruple-precision closed forms; reference for the tiny-z regime where the
// double closed form cancels catastrophically.
double varx_q(double gamma, double dt) {
  const __float128 g = gamma, z = static_cast<__float128>(gamma) * dt;
  const __float128 b = z + 2.0Q * expm1q(-z) - 0.5Q * expm1q(-2.0Q * z);
  return static_cast<double>(2.0Q / (g * g) * b);
}
double covxp_q(double gamma, double dt) {
  const __float128 g = gamma, z = static_cast<__float128>(gamma) * dt;
  const __float128 w = -expm1q(-z);
  return static_cast<double>(w * w / g);
}
double varp_q(double gamma, double dt) {
  const __float128 z = static_cast<__float128>(gamma) * dt;
  return static_cast<double>(-expm1q(-2.0Q * z));
}

double ito_integral(double gamma, double dt, bool aa, bool bb) {
  return 2.0 * gamma *
         adaptive_simpson(
             [&](double s) {
               const double a = ou_c1(gamma, dt - s);
               const double b = ou_decay(gamma, dt - s);
               if (aa) return a * a;
               if (bb) return b * b;
               return a * b;
             },
             0.0, dt, 0.0, 1e-13);
}

}  // namespace

TEST_CASE("noise_block matches the Ito-isometry quadrature oracle") {
  for (double gamma : {0.1, 1.0, std::sqrt(32.0), 10.0}) {
    for (double dt : {1e-6, 1e-3, 0.1, 1.0}) {
      const NoiseBlock b = noise_block(gamma, dt);
      CHECK(rel(b.var_x, ito_integral(gamma, dt, true, false)) < 1e-10);
      CHECK(rel(b.var_p, ito_integral(gamma, dt, false, true)) < 1e-10);
      CHECK(rel(b.cov_xp, ito_integral(gamma, dt, false, false)) < 1e-10);
    }
  }
}

TEST_CASE("degenerate and limit blocks") {
  const NoiseBlock zero = noise_block(1.7, 0.0);
  CHECK(zero.var_x == 0.0);
  CHECK(zero.var_p == 0.0);
  CHECK(zero.cov_xp == 0.0);

  // stationary momentum variance in the long-time limit
  CHECK(noise_block(1.0, 1e6).var_p == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(noise_block(0.0, 0.1), ContractError);
  CHECK_THROWS_AS(noise_block(1.0, -0.1), ContractError);
}

TEST_CASE("series and closed-form branches agree to 1e-10 through the guard region") {
  for (double z = 1e-9; z <= 1.1e-4; z *= 3.0) {
    for (double gamma : {0.25, 1.0, 7.5}) {
      const double dt = z / gamma;
      const NoiseBlock b = noise_block(gamma, dt);
      CHECK(rel(b.var_x, varx_q(gamma, dt)) < 1e-10);
      CHECK(rel(b.var_p, varp_q(gamma, dt)) < 1e-10);
      CHECK(rel(b.cov_xp, covxp_q(gamma, dt)) < 1e-10);
    }
  }
  // and across the internal series/closed switch
  for (double z : {0.4999, 0.5001}) {
    const NoiseBlock b = noise_block(1.0, z);
    CHECK(rel(b.var_x, varx_q(1.0, z)) < 1e-12);
  }
}

TEST_CASE("small-dt leading orders") {
  const double gamma = 2.3, dt = 1e-7;
  const NoiseBlock b = noise_block(gamma, dt);
  CHECK(rel(b.var_p, 2.0 * gamma * dt) < 1e-6);
  CHECK(rel(b.cov_xp, gamma * dt * dt) < 1e-6);
  CHECK(rel(b.var_x, (2.0 / 3.0) * gamma * dt * dt * dt) < 1e-6);
}

TEST_CASE("scale covariance at fixed gamma*dt") {
  const double z = 0.37;
  const NoiseBlock ref = noise_block(1.0, z);
  for (double gamma : {0.2, 3.0, 40.0}) {
    const NoiseBlock b = noise_block(gamma, z / gamma);
    CHECK(rel(b.var_p, ref.var_p) < 1e-14);
    CHECK(rel(b.cov_xp * gamma, ref.cov_xp) < 1e-14);
    CHECK(rel(b.var_x * gamma * gamma, ref.var_x) < 1e-14);
  }
}

TEST_CASE("cholesky factor reproduces the block and stays PSD") {
  for (double z = 1e-8; z < 30.0; z *= 10.0) {
    const NoiseBlock b = noise_block(1.3, z / 1.3);
    CHECK(rel(b.l11 * b.l11, b.var_x) < 1e-12);
    CHECK(rel(b.l11 * b.l21, b.cov_xp) < 1e-12);
    CHECK(rel(b.l21 * b.l21 + b.l22 * b.l22, b.var_p) < 1e-10);
    CHECK(b.var_x * b.var_p - b.cov_xp * b.cov_xp >= -1e-15);
  }
}

TEST_CASE("compose_noise identities") {
  const double gamma = 1.9;
  RngStream rng(7);
  const NoisePair first = draw_noise_pair(noise_block(gamma, 0.3), 4, rng);

  SUBCASE("zero-length second segment is the identity") {
    NoisePair zero{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), 0.0};
    const NoisePair out = compose_noise(first, zero, gamma);
    CHECK((out.xi1 - first.xi1).norm() == 0.0);
    CHECK((out.xi2 - first.xi2).norm() == 0.0);
  }
  SUBCASE("zero pairs compose to zero") {
    NoisePair a{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), 0.2};
    NoisePair b{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), 0.4};
    const NoisePair out = compose_noise(a, b, gamma);
    CHECK(out.xi1.norm() == 0.0);
    CHECK(out.xi2.norm() == 0.0);
    CHECK(out.dt == doctest::Approx(0.6));
  }
  SUBCASE("dimension mismatch is rejected") {
    NoisePair bad{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), 0.1};
    CHECK_THROWS_AS(compose_noise(first, bad, gamma), ContractError);
  }
}

TEST_CASE("exact covariance propagation of composition matches the whole-interval block") {
  // (xi1, xi2) over dt1+dt2 as a linear map of the two independent pairs.
  for (double gamma : {0.5, std::sqrt(32.0)}) {
    for (auto [dt1, dt2] : {std::pair{0.2, 0.5}, std::pair{1e-5, 0.3}}) {
      const NoiseBlock b1 = noise_block(gamma, dt1), b2 = noise_block(gamma, dt2);
      const double c1 = ou_c1(gamma, dt2), e2 = ou_decay(gamma, dt2);
      const double vx = b1.var_x + 2.0 * c1 * b1.cov_xp + c1 * c1 * b1.var_p + b2.var_x;
      const double cxp = e2 * (b1.cov_xp + c1 * b1.var_p) + b2.cov_xp;
      const double vp = e2 * e2 * b1.var_p + b2.var_p;
      const NoiseBlock whole = noise_block(gamma, dt1 + dt2);
      CHECK(std::abs(vx - whole.var_x) < 1e-12);
      CHECK(std::abs(cxp - whole.cov_xp) < 1e-12);
      CHECK(std::abs(vp - whole.var_p) < 1e-12);
    }
  }
}

TEST_CASE("draw_step_noise: composition consistency and replay determinism") {
  const double gamma = 2.2, h = 0.7;
  RngStream rng(42);
  const StepNoiseDraw d = draw_step_noise(gamma, h, {0.2, 0.55}, 3, rng);

  // stored sub-draws recompose to the full pair
  NoisePair acc{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), 0.0};
  for (const NoisePair& seg : d.seed_path) acc = compose_noise(acc, seg, gamma);
  CHECK((acc.xi1 - d.xi1_full).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((acc.xi2 - d.xi2_full).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(d.xi1_at.count(0.2) == 1);
  CHECK(d.xi1_at.count(0.55) == 1);

  RngStream rng2(42);
  const StepNoiseDraw d2 = draw_step_noise(gamma, h, {0.2, 0.55}, 3, rng2);
  CHECK((d.xi1_full - d2.xi1_full).norm() == 0.0);
  CHECK((d.xi2_full - d2.xi2_full).norm() == 0.0);
  CHECK((d.xi1_at.at(0.55) - d2.xi1_at.at(0.55)).norm() == 0.0);

  CHECK_THROWS_AS(draw_step_noise(gamma, h, {0.5, 0.2}, 3, rng), ContractError);
  CHECK_THROWS_AS(draw_step_noise(gamma, h, {1.1 * h}, 3, rng), ContractError);
}

TEST_CASE("forced-zero second segment reduces to the composition law") {
  const double gamma = 1.1, h = 0.5;
  RngStream rng(9);
  const NoisePair half = draw_noise_pair(noise_block(gamma, h / 2), 2, rng);
  NoisePair zero{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), h / 2};
  const NoisePair full = compose_noise(half, zero, gamma);
  const Eigen::VectorXd expect = half.xi1 + ou_c1(gamma, h / 2) * half.xi2;
  CHECK((full.xi1 - expect).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("Monte Carlo joint covariance of restricted noise matches quadrature") {
  const NoiseSelftestReport rep = noise_selftest(120000, 99);
  CHECK(rep.max_moment_rel_err < 1e-10);
  CHECK(rep.composition_max_abs_err < 1e-12);
  CHECK(rep.joint_max_dev_se < 5.0);
  CHECK(rep.pass);
}
