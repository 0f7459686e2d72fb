#include "uld/spd_matrix.hpp"

#include <cmath>

#include "uld/errors.hpp"
#include "uld/rng.hpp"

namespace uld {

SpdMatrix SpdMatrix::Scalar(int dim, double value) {
  if (dim <= 0) throw ContractError("SpdMatrix: dim must be positive");
  if (value < 0.0) throw ContractError("SpdMatrix: scalar form must be >= 0");
  SpdMatrix m;
  m.kind_ = Kind::kScalar;
  m.dim_ = dim;
  m.scalar_ = value;
  return m;
}

SpdMatrix SpdMatrix::Diagonal(Eigen::VectorXd diag) {
  if (diag.size() == 0) throw ContractError("SpdMatrix: empty diagonal");
  if ((diag.array() < 0.0).any()) throw ContractError("SpdMatrix: negative diagonal entry");
  SpdMatrix m;
  m.kind_ = Kind::kDiagonal;
  m.dim_ = static_cast<int>(diag.size());
  m.diag_ = std::move(diag);
  return m;
}

SpdMatrix SpdMatrix::Dense(Eigen::MatrixXd mat) {
  if (mat.rows() != mat.cols() || mat.rows() == 0) throw ContractError("SpdMatrix: not square");
  SpdMatrix m;
  m.kind_ = Kind::kDense;
  m.dim_ = static_cast<int>(mat.rows());
  m.dense_ = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -1e-12 * scale) throw NumericalError("SpdMatrix: dense form is not PSD");
  m.llt_.compute(m.dense_);
  m.dense_pd_ = (m.llt_.info() == Eigen::Success) && lo > 0.0;
  return m;
}

double SpdMatrix::trace() const {
  switch (kind_) {
    case Kind::kScalar: return scalar_ * dim_;
    case Kind::kDiagonal: return diag_.sum();
    case Kind::kDense: return dense_.trace();
  }
  return 0.0;
}

Eigen::VectorXd SpdMatrix::eigenvalues() const {
  switch (kind_) {
    case Kind::kScalar: return Eigen::VectorXd::Constant(dim_, scalar_);
    case Kind::kDiagonal: {
      Eigen::VectorXd v = diag_;
      std::sort(v.data(), v.data() + v.size());
      return v;
    }
    case Kind::kDense: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_, Eigen::EigenvaluesOnly);
      return es.eigenvalues();
    }
  }
  return {};
}

double SpdMatrix::max_eigenvalue() const {
  if (kind_ == Kind::kScalar) return scalar_;
  if (kind_ == Kind::kDiagonal) return diag_.maxCoeff();
  return eigenvalues().maxCoeff();
}

double SpdMatrix::min_eigenvalue() const {
  if (kind_ == Kind::kScalar) return scalar_;
  if (kind_ == Kind::kDiagonal) return diag_.minCoeff();
  return eigenvalues().minCoeff();
}

Eigen::VectorXd SpdMatrix::apply(const Eigen::VectorXd& v) const {
  if (v.size() != dim_) throw ContractError("SpdMatrix::apply: dimension mismatch");
  switch (kind_) {
    case Kind::kScalar: return scalar_ * v;
    case Kind::kDiagonal: return diag_.cwiseProduct(v);
    case Kind::kDense: return dense_ * v;
  }
  return {};
}

double SpdMatrix::quadratic_form(const Eigen::VectorXd& v) const { return v.dot(apply(v)); }

Eigen::VectorXd SpdMatrix::solve(const Eigen::VectorXd& b) const {
  if (b.size() != dim_) throw ContractError("SpdMatrix::solve: dimension mismatch");
  switch (kind_) {
    case Kind::kScalar:
      if (scalar_ <= 0.0) throw NumericalError("SpdMatrix::solve: singular");
      return b / scalar_;
    case Kind::kDiagonal:
      if ((diag_.array() <= 0.0).any()) throw NumericalError("SpdMatrix::solve: singular");
      return b.cwiseQuotient(diag_);
    case Kind::kDense:
      if (!dense_pd_) throw NumericalError("SpdMatrix::solve: singular");
      return llt_.solve(b);
  }
  return {};
}

Eigen::VectorXd SpdMatrix::sample_inverse_gaussian(RngStream& rng) const {
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
  switch (kind_) {
    case Kind::kScalar:
      if (scalar_ <= 0.0) throw NumericalError("SpdMatrix: cannot sample, singular");
      return z / std::sqrt(scalar_);
    case Kind::kDiagonal:
      if ((diag_.array() <= 0.0).any()) throw NumericalError("SpdMatrix: cannot sample, singular");
      return z.cwiseQuotient(diag_.cwiseSqrt());
    case Kind::kDense: {
      if (!dense_pd_) throw NumericalError("SpdMatrix: cannot sample, singular");
      // cov = (L L^T)^{-1}: x = L^{-T} z has covariance M^{-1}.
      return llt_.matrixU().solve(z);
    }
  }
  return {};
}

Eigen::MatrixXd SpdMatrix::dense() const {
  switch (kind_) {
    case Kind::kScalar: return scalar_ * Eigen::MatrixXd::Identity(dim_, dim_);
    case Kind::kDiagonal: return diag_.asDiagonal();
    case Kind::kDense: return dense_;
  }
  return {};
}

void SpdMatrix::eigen_decomposition(Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) const {
  if (kind_ == Kind::kDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_);
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
    return;
  }
  evals = kind_ == Kind::kScalar ? Eigen::VectorXd::Constant(dim_, scalar_) : diag_;
  evecs = Eigen::MatrixXd::Identity(dim_, dim_);
}

}  // namespace uld
