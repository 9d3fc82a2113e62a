#pragma once

#include <Eigen/Dense>

namespace etpr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Symmetry is checked where it matters (factorization)
/// rather than carried in the type.
using SymMatrix = Eigen::MatrixXd;

/// Cholesky factor of `A + jitter_used * I`.
///
/// Immutable after construction. Everything downstream that needs a solve,
/// a log-determinant or a Mahalanobis form goes through this type so the
/// jitter that was actually applied is always auditable.
class PsdFactor {
 public:
  PsdFactor(Matrix lower, double jitter_used);

  Eigen::Index dim() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }
  double jitter_used() const noexcept { return jitter_used_; }
  double log_det() const noexcept { return log_det_; }

 private:
  Matrix lower_;
  double jitter_used_;
  double log_det_;
};

/// Default starting jitter: 1e-8 times the mean diagonal entry.
double default_jitter(const SymMatrix& a);

/// Factor `A + j I` where j is the first level of
/// {0, base, 10 base, ..., 1e6 base} that succeeds.
/// Throws NotPositiveDefinite when every level fails, DimensionMismatch for
/// non-square input and Error when `a` is not symmetric.
PsdFactor chol_with_jitter(const SymMatrix& a, double base_jitter);

/// Same, with `default_jitter(a)` as the base level.
PsdFactor chol_with_jitter(const SymMatrix& a);

Vector solve_psd(const PsdFactor& f, const Vector& b);

/// Solves for every column of `b`.
Matrix solve_psd(const PsdFactor& f, const Matrix& b);

/// y^T (A + jI)^{-1} y, clamped at zero.
double quad_form(const PsdFactor& f, const Vector& y);

/// (A + jI)^{-1} as an explicit dense matrix. Used by gradient code that
/// needs traces against many derivative matrices.
Matrix inverse_psd(const PsdFactor& f);

/// log Gamma(x + h) - log Gamma(x) for x > 0, h >= 0. Stays accurate when x is
/// huge, where subtracting two lgamma values loses every significant digit.
double log_gamma_ratio(double x, double h);

/// digamma(x + h) - digamma(x), with the same large-x care.
double digamma_diff(double x, double h);

}  // namespace etpr
