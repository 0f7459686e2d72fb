#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "uld/spd_matrix.hpp"

namespace uld {

// Potential contract: value, gradient, convexity/smoothness constants, a PSD
// Hessian upper bound H, and the analytic minimizer. Immutable after
// construction; all queries are pure and safe to call concurrently.
class PotentialModel {
 public:
  virtual ~PotentialModel() = default;

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const SpdMatrix& hessian_bound() const { return hessian_bound_; }
  const Eigen::VectorXd& minimizer() const { return minimizer_; }
  double hessian_trace() const { return hessian_bound_.trace(); }

  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;

  // Quadratic potentials expose their precision for the exact-law machinery.
  virtual const SpdMatrix* precision() const { return nullptr; }

 protected:
  PotentialModel(int dim, double alpha, double beta, SpdMatrix hessian_bound,
                 Eigen::VectorXd minimizer);
  void check_dim(const Eigen::VectorXd& x) const;

 private:
  int dim_;
  double alpha_;
  double beta_;
  SpdMatrix hessian_bound_;
  Eigen::VectorXd minimizer_;
};

// V(x) = (1/2) (x - m)^T S (x - m) with precision S; H = S exactly.
class QuadraticPotential : public PotentialModel {
 public:
  QuadraticPotential(SpdMatrix precision, Eigen::VectorXd minimizer);

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  const SpdMatrix* precision() const override { return &precision_; }

 private:
  SpdMatrix precision_;
};

// Ridge-separable V(x) = sum_i sigma_i(a_i^T x - b_i) with quadratic ridge
// profile sigma_i(t) = c_i t^2 / 2, so the Hessian sum_i c_i a_i a_i^T is
// constant and tr(H) = sum_i c_i for unit directions, independent of dim.
struct RidgeSeparableSpec {
  Eigen::MatrixXd directions;      // n x d, rows are unit vectors a_i
  Eigen::VectorXd ridge_curvatures;  // n positive scalars c_i
  Eigen::VectorXd anchor_shifts;   // n scalars b_i
};

class RidgeSeparablePotential : public PotentialModel {
 public:
  explicit RidgeSeparablePotential(RidgeSeparableSpec spec);

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  const SpdMatrix* precision() const override;

  const RidgeSeparableSpec& spec() const { return spec_; }

 private:
  RidgeSeparableSpec spec_;
  SpdMatrix hessian_;  // also the quadratic precision (shifted minimizer)
};

// Smooth non-quadratic ridge for sampler smoke tests only: softplus profile
// sigma_i(t) = c_i * softplus(t - b_i), curvature bound c_i / 4 per ridge.
class LogisticRidgePotential : public PotentialModel {
 public:
  LogisticRidgePotential(Eigen::MatrixXd directions, Eigen::VectorXd weights,
                         Eigen::VectorXd shifts, double anchor_curvature);

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;

 private:
  Eigen::MatrixXd directions_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd shifts_;
  double anchor_curvature_;  // quadratic anchor keeps the target proper
};

// Central finite-difference gradient at relative step 1e-5 * (1 + ||x||).
Eigen::VectorXd finite_difference_gradient(const PotentialModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd finite_difference_hessian(const PotentialModel& model, const Eigen::VectorXd& x);

// Verifies alpha I <= H_fd(x) <= H <= beta I at each probe point via
// finite-difference Hessians; passes iff every minimum eigenvalue defect is
// >= -tol.
struct CurvatureSandwichReport {
  struct Probe {
    double min_eig_above_alpha;  // min eig(H_fd - alpha I)
    double min_eig_below_bound;  // min eig(H - H_fd)
  };
  std::vector<Probe> probes;
  double min_eig_bound_vs_beta = 0.0;  // min eig(beta I - H)
  bool pass = false;
};

CurvatureSandwichReport check_curvature_sandwich(const PotentialModel& model,
                                                 const std::vector<Eigen::VectorXd>& probe_points,
                                                 double tol);

}  // namespace uld
