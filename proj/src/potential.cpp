#include "uld/potential.hpp"

#include <cmath>

#include "uld/errors.hpp"

namespace uld {

PotentialModel::PotentialModel(int dim, double alpha, double beta, SpdMatrix hessian_bound,
                               Eigen::VectorXd minimizer)
    : dim_(dim), alpha_(alpha), beta_(beta), hessian_bound_(std::move(hessian_bound)),
      minimizer_(std::move(minimizer)) {
  if (dim_ <= 0) throw ContractError("PotentialModel: dim must be positive");
  if (alpha_ < 0.0) throw ContractError("PotentialModel: alpha must be >= 0");
  if (!(beta_ > 0.0)) throw ContractError("PotentialModel: beta must be > 0");
  if (hessian_bound_.dim() != dim_ || minimizer_.size() != dim_)
    throw ContractError("PotentialModel: inconsistent dimensions");
}

void PotentialModel::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ContractError("PotentialModel: input dimension mismatch");
}

namespace {
void check_first_order_condition(const PotentialModel& m) {
  const double gnorm = m.gradient(m.minimizer()).norm();
  const double tol = 1e-8 * m.beta() * m.minimizer().norm() + 1e-12;
  if (gnorm > tol) throw NumericalError("PotentialModel: gradient at minimizer is not ~0");
}
}  // namespace

QuadraticPotential::QuadraticPotential(SpdMatrix precision, Eigen::VectorXd minimizer)
    : PotentialModel(precision.dim(), precision.min_eigenvalue(), precision.max_eigenvalue(),
                     precision, std::move(minimizer)),
      precision_(std::move(precision)) {
  if (!(beta() > 0.0)) throw ContractError("QuadraticPotential: precision must be nonzero");
  check_first_order_condition(*this);
}

double QuadraticPotential::value(const Eigen::VectorXd& x) const {
  check_dim(x);
  return 0.5 * precision_.quadratic_form(x - minimizer());
}

Eigen::VectorXd QuadraticPotential::gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  return precision_.apply(x - minimizer());
}

namespace {

SpdMatrix ridge_hessian(const RidgeSeparableSpec& spec) {
  const int d = static_cast<int>(spec.directions.cols());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < spec.directions.rows(); ++i)
    h += spec.ridge_curvatures[i] * spec.directions.row(i).transpose() * spec.directions.row(i);
  return SpdMatrix::Dense(h);
}

Eigen::VectorXd ridge_minimizer(const RidgeSeparableSpec& spec) {
  // Least-norm x with a_i^T x = b_i in the span of the directions.
  const Eigen::MatrixXd& a = spec.directions;
  Eigen::VectorXd x = a.transpose() * (a * a.transpose()).ldlt().solve(spec.anchor_shifts);
  return x;
}

}  // namespace

RidgeSeparablePotential::RidgeSeparablePotential(RidgeSeparableSpec spec)
    : PotentialModel(static_cast<int>(spec.directions.cols()),
                     /*alpha=*/0.0, ridge_hessian(spec).max_eigenvalue(), ridge_hessian(spec),
                     ridge_minimizer(spec)),
      spec_(std::move(spec)), hessian_(ridge_hessian(spec_)) {
  for (int i = 0; i < spec_.directions.rows(); ++i) {
    if (std::abs(spec_.directions.row(i).norm() - 1.0) > 1e-10)
      throw ContractError("RidgeSeparablePotential: directions must be unit vectors");
    if (!(spec_.ridge_curvatures[i] > 0.0))
      throw ContractError("RidgeSeparablePotential: curvatures must be > 0");
  }
  check_first_order_condition(*this);
}

double RidgeSeparablePotential::value(const Eigen::VectorXd& x) const {
  check_dim(x);
  const Eigen::VectorXd t = spec_.directions * x - spec_.anchor_shifts;
  return 0.5 * (spec_.ridge_curvatures.array() * t.array().square()).sum();
}

Eigen::VectorXd RidgeSeparablePotential::gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  const Eigen::VectorXd t = spec_.directions * x - spec_.anchor_shifts;
  return spec_.directions.transpose() * (spec_.ridge_curvatures.cwiseProduct(t));
}

const SpdMatrix* RidgeSeparablePotential::precision() const {
  // Quadratic ridge profile: V is exactly quadratic with precision = Hessian,
  // but typically singular, so the Gaussian-law oracle only applies when the
  // directions span R^d.
  return &hessian_;
}

namespace {

SpdMatrix logistic_hessian_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& w,
                                 double anchor) {
  const int d = static_cast<int>(a.cols());
  return SpdMatrix::Dense(anchor * Eigen::MatrixXd::Identity(d, d) +
                          0.25 * a.transpose() * w.asDiagonal() * a);
}

// Newton on the (strongly convex) logistic-ridge gradient.
Eigen::VectorXd logistic_minimizer(const Eigen::MatrixXd& a, const Eigen::VectorXd& w,
                                   const Eigen::VectorXd& b, double anchor) {
  const int d = static_cast<int>(a.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  for (int it = 0; it < 64; ++it) {
    const Eigen::VectorXd t = a * x - b;
    Eigen::VectorXd sig(t.size()), sigp(t.size());
    for (int i = 0; i < t.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-t[i]));
      sig[i] = w[i] * p;
      sigp[i] = w[i] * p * (1.0 - p);
    }
    const Eigen::VectorXd g = anchor * x + a.transpose() * sig;
    if (g.norm() <= 1e-13) break;
    const Eigen::MatrixXd h =
        anchor * Eigen::MatrixXd::Identity(d, d) + a.transpose() * sigp.asDiagonal() * a;
    x -= h.ldlt().solve(g);
  }
  return x;
}

}  // namespace

LogisticRidgePotential::LogisticRidgePotential(Eigen::MatrixXd directions, Eigen::VectorXd weights,
                                               Eigen::VectorXd shifts, double anchor_curvature)
    : PotentialModel(static_cast<int>(directions.cols()), anchor_curvature,
                     logistic_hessian_bound(directions, weights, anchor_curvature).max_eigenvalue(),
                     logistic_hessian_bound(directions, weights, anchor_curvature),
                     logistic_minimizer(directions, weights, shifts, anchor_curvature)),
      directions_(std::move(directions)), weights_(std::move(weights)), shifts_(std::move(shifts)),
      anchor_curvature_(anchor_curvature) {
  if (!(anchor_curvature_ > 0.0))
    throw ContractError("LogisticRidgePotential: anchor curvature must be > 0");
  check_first_order_condition(*this);
}

double LogisticRidgePotential::value(const Eigen::VectorXd& x) const {
  check_dim(x);
  double v = 0.5 * anchor_curvature_ * x.squaredNorm();
  const Eigen::VectorXd t = directions_ * x - shifts_;
  for (int i = 0; i < t.size(); ++i) {
    // softplus, overflow-safe
    const double ti = t[i];
    v += weights_[i] * (ti > 30.0 ? ti : std::log1p(std::exp(ti)));
  }
  return v;
}

Eigen::VectorXd LogisticRidgePotential::gradient(const Eigen::VectorXd& x) const {
  check_dim(x);
  const Eigen::VectorXd t = directions_ * x - shifts_;
  Eigen::VectorXd sig(t.size());
  for (int i = 0; i < t.size(); ++i) sig[i] = weights_[i] / (1.0 + std::exp(-t[i]));
  return anchor_curvature_ * x + directions_.transpose() * sig;
}

Eigen::VectorXd finite_difference_gradient(const PotentialModel& model, const Eigen::VectorXd& x) {
  const double step = 1e-5 * (1.0 + x.norm());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd e = x;
  for (int i = 0; i < x.size(); ++i) {
    e[i] = x[i] + step;
    const double fp = model.value(e);
    e[i] = x[i] - step;
    const double fm = model.value(e);
    e[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Eigen::MatrixXd finite_difference_hessian(const PotentialModel& model, const Eigen::VectorXd& x) {
  const double step = 1e-5 * (1.0 + x.norm());
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd e = x;
  for (int j = 0; j < d; ++j) {
    e[j] = x[j] + step;
    const Eigen::VectorXd gp = model.gradient(e);
    e[j] = x[j] - step;
    const Eigen::VectorXd gm = model.gradient(e);
    e[j] = x[j];
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

CurvatureSandwichReport check_curvature_sandwich(const PotentialModel& model,
                                                 const std::vector<Eigen::VectorXd>& probe_points,
                                                 double tol) {
  CurvatureSandwichReport report;
  const int d = model.dim();
  const Eigen::MatrixXd h_bound = model.hessian_bound().dense();
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        model.beta() * Eigen::MatrixXd::Identity(d, d) - h_bound, Eigen::EigenvaluesOnly);
    report.min_eig_bound_vs_beta = es.eigenvalues().minCoeff();
  }
  bool ok = report.min_eig_bound_vs_beta >= -tol;
  for (const auto& x : probe_points) {
    if (!x.allFinite()) throw ContractError("check_curvature_sandwich: non-finite probe");
    const Eigen::MatrixXd h_fd = finite_difference_hessian(model, x);
    CurvatureSandwichReport::Probe p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lo(
        h_fd - model.alpha() * Eigen::MatrixXd::Identity(d, d), Eigen::EigenvaluesOnly);
    p.min_eig_above_alpha = lo.eigenvalues().minCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hi(h_bound - h_fd, Eigen::EigenvaluesOnly);
    p.min_eig_below_bound = hi.eigenvalues().minCoeff();
    ok = ok && p.min_eig_above_alpha >= -tol && p.min_eig_below_bound >= -tol;
    report.probes.push_back(p);
  }
  report.pass = ok;
  return report;
}

}  // namespace uld
