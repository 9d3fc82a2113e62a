#include "etpr/numerics.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

constexpr double kSymmetryTol = 1e-12;
// A pivot this small relative to the largest diagonal entry is treated as a
// failed factorization, so rank-deficient inputs escalate instead of
// producing an enormous negative log-determinant.
constexpr double kPivotFloor = 1e-13;
constexpr int kEscalationLevels = 7;  // base * 10^0 .. base * 10^6

void check_symmetric(const SymMatrix& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTol * scale) {
        throw Error("matrix is not symmetric");
      }
    }
  }
}

bool try_factor(const SymMatrix& a, double jitter, Matrix& lower) {
  Matrix shifted = a;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  const double max_diag = shifted.diagonal().maxCoeff();
  const double min_pivot = lower.diagonal().array().square().minCoeff();
  if (!(min_pivot > kPivotFloor * max_diag)) return false;
  return lower.allFinite();
}

void check_length(const PsdFactor& f, Eigen::Index n) {
  if (n != f.dim()) {
    throw DimensionMismatch("expected length " + std::to_string(f.dim()) + ", got " +
                            std::to_string(n));
  }
}

}  // namespace

PsdFactor::PsdFactor(Matrix lower, double jitter_used)
    : lower_(std::move(lower)), jitter_used_(jitter_used) {
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

double default_jitter(const SymMatrix& a) {
  if (a.rows() == 0) return 0.0;
  return 1e-8 * std::abs(a.diagonal().mean());
}

PsdFactor chol_with_jitter(const SymMatrix& a, double base_jitter) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw DimensionMismatch("chol_with_jitter: matrix must be square and non-empty");
  }
  if (!(base_jitter >= 0.0)) {
    throw Error("chol_with_jitter: base jitter must be nonnegative");
  }
  check_symmetric(a);

  Matrix lower;
  if (try_factor(a, 0.0, lower)) return PsdFactor(std::move(lower), 0.0);
  if (base_jitter > 0.0) {
    double jitter = base_jitter;
    for (int level = 0; level < kEscalationLevels; ++level, jitter *= 10.0) {
      if (try_factor(a, jitter, lower)) return PsdFactor(std::move(lower), jitter);
    }
  }
  throw NotPositiveDefinite("matrix is not positive definite at any jitter level");
}

PsdFactor chol_with_jitter(const SymMatrix& a) { return chol_with_jitter(a, default_jitter(a)); }

Vector solve_psd(const PsdFactor& f, const Vector& b) {
  check_length(f, b.size());
  const auto lower = f.lower().triangularView<Eigen::Lower>();
  Vector z = lower.solve(b);
  return lower.transpose().solve(z);
}

Matrix solve_psd(const PsdFactor& f, const Matrix& b) {
  check_length(f, b.rows());
  const auto lower = f.lower().triangularView<Eigen::Lower>();
  Matrix z = lower.solve(b);
  return lower.transpose().solve(z);
}

double quad_form(const PsdFactor& f, const Vector& y) {
  check_length(f, y.size());
  const Vector z = f.lower().triangularView<Eigen::Lower>().solve(y);
  return std::max(0.0, z.squaredNorm());
}

Matrix inverse_psd(const PsdFactor& f) {
  return solve_psd(f, Matrix(Matrix::Identity(f.dim(), f.dim())));
}

namespace {

// Below this the direct difference is accurate; above it the Stirling
// series (truncated after the x^-9 term) is exact to double precision.
constexpr double kAsymptotic = 20.0;
constexpr std::array<double, 5> kLogGammaSeries = {1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680,
                                                   1.0 / 1188};
constexpr std::array<double, 5> kDigammaSeries = {1.0 / 12, -1.0 / 120, 1.0 / 252, -1.0 / 240,
                                                  1.0 / 132};

// log Gamma(x + f) - log Gamma(x) for 0 <= f < 1 and x >= kAsymptotic.
double stirling_delta(double x, double f) {
  const double z = x + f;
  double out = (x - 0.5) * std::log1p(f / x) + f * std::log(z) - f;
  for (std::size_t k = 0; k < kLogGammaSeries.size(); ++k) {
    const double e = static_cast<double>(2 * k + 1);
    out += kLogGammaSeries[k] * (std::pow(z, -e) - std::pow(x, -e));
  }
  return out;
}

double digamma_delta(double x, double f) {
  const double z = x + f;
  double out = std::log1p(f / x) - 0.5 * (1.0 / z - 1.0 / x);
  for (std::size_t k = 0; k < kDigammaSeries.size(); ++k) {
    const double e = static_cast<double>(2 * k + 2);
    out -= kDigammaSeries[k] * (std::pow(z, -e) - std::pow(x, -e));
  }
  return out;
}

}  // namespace

double log_gamma_ratio(double x, double h) {
  if (x < kAsymptotic) return std::lgamma(x + h) - std::lgamma(x);
  const double whole = std::floor(h);
  const double f = h - whole;
  double out = stirling_delta(x, f);
  for (double j = 0; j < whole; j += 1.0) out += std::log(x + f + j);
  return out;
}

double digamma_diff(double x, double h) {
  if (x < kAsymptotic) return boost::math::digamma(x + h) - boost::math::digamma(x);
  const double whole = std::floor(h);
  const double f = h - whole;
  double out = digamma_delta(x, f);
  for (double j = 0; j < whole; j += 1.0) out += 1.0 / (x + f + j);
  return out;
}

}  // namespace etpr
