#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

namespace uld {

// Symmetric positive semi-definite matrix in one of three forms: scalar
// multiple of the identity, diagonal, or dense (validated by LDLT on
// construction). Used for Hessian upper bounds and quadratic precisions.
class SpdMatrix {
 public:
  static SpdMatrix Scalar(int dim, double value);
  static SpdMatrix Diagonal(Eigen::VectorXd diag);
  static SpdMatrix Dense(Eigen::MatrixXd m);  // symmetrized; must be PSD
  static SpdMatrix Identity(int dim) { return Scalar(dim, 1.0); }

  int dim() const { return dim_; }
  bool is_scalar() const { return kind_ == Kind::kScalar; }
  bool is_diagonal() const { return kind_ != Kind::kDense; }

  double trace() const;
  double max_eigenvalue() const;
  double min_eigenvalue() const;
  // Eigenvalues, ascending.
  Eigen::VectorXd eigenvalues() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  double quadratic_form(const Eigen::VectorXd& v) const;  // v^T M v
  // Solve M x = b; requires strictly positive definite.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  // Draw z ~ N(0, M^{-1}); requires strictly positive definite.
  Eigen::VectorXd sample_inverse_gaussian(class RngStream& rng) const;

  Eigen::MatrixXd dense() const;
  // Aligned decomposition M = U diag(evals) U^T (U = I for scalar/diagonal
  // forms, evals then unsorted).
  void eigen_decomposition(Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) const;

  double scalar_value() const { return scalar_; }
  const Eigen::VectorXd& diagonal_values() const { return diag_; }

 private:
  enum class Kind { kScalar, kDiagonal, kDense };
  Kind kind_ = Kind::kScalar;
  int dim_ = 0;
  double scalar_ = 0.0;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd dense_;
  Eigen::LLT<Eigen::MatrixXd> llt_;  // of dense_ (when PD)
  bool dense_pd_ = false;
};

}  // namespace uld
