#include <gtest/gtest.h>

#include <cmath>

#include "etpr/errors.hpp"
#include "etpr/numerics.hpp"
#include "support.hpp"

namespace etpr {
namespace {

TEST(Cholesky, KnownTwoByTwo) {
  SymMatrix a(2, 2);
  a << 4.0, 2.0, 2.0, 3.0;
  const PsdFactor f = chol_with_jitter(a);
  EXPECT_EQ(f.jitter_used(), 0.0);
  EXPECT_NEAR(f.lower()(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(f.lower()(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(f.lower()(1, 1), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(f.lower()(0, 1), 0.0);
  EXPECT_NEAR(f.log_det(), std::log(8.0), 1e-14);
}

TEST(Cholesky, SolveAndQuadFormMatchLu) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix a = testing::random_spd(7, rng);
    const Vector y = testing::random_vector(7, rng);
    const PsdFactor f = chol_with_jitter(a);
    const Eigen::FullPivLU<Matrix> lu(a);
    EXPECT_LT((solve_psd(f, y) - lu.solve(y)).norm(), 1e-10);
    EXPECT_NEAR(quad_form(f, y), y.dot(lu.solve(y)), 1e-10);
    EXPECT_NEAR(f.log_det(), std::log(lu.determinant()), 1e-10);
    EXPECT_LT((inverse_psd(f) * a - Matrix::Identity(7, 7)).norm(), 1e-10);
    const Matrix b = testing::random_matrix(7, 3, rng);
    EXPECT_LT((a * solve_psd(f, b) - b).norm(), 1e-10);
  }
}

TEST(Cholesky, RankDeficientEscalatesJitter) {
  const SymMatrix ones = Matrix::Ones(4, 4);
  const PsdFactor f = chol_with_jitter(ones);
  EXPECT_GT(f.jitter_used(), 0.0);
  const Matrix rebuilt = f.lower() * f.lower().transpose();
  EXPECT_LT((rebuilt - ones - f.jitter_used() * Matrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(Cholesky, JitterLevelsFollowTheLadder) {
  const SymMatrix ones = Matrix::Ones(3, 3);
  const double base = 1e-6;
  const double used = chol_with_jitter(ones, base).jitter_used();
  const double level = std::log10(used / base);
  EXPECT_NEAR(level, std::round(level), 1e-9);
  EXPECT_GE(used, base);
}

TEST(Cholesky, NegativeDefiniteThrows) {
  const SymMatrix a = -Matrix::Identity(3, 3);
  EXPECT_THROW(chol_with_jitter(a), NotPositiveDefinite);
}

TEST(Cholesky, RejectsMalformedInput) {
  SymMatrix asym(2, 2);
  asym << 2.0, 1.0, 0.0, 2.0;
  EXPECT_THROW(chol_with_jitter(asym), Error);
  EXPECT_THROW(chol_with_jitter(Matrix::Ones(2, 3)), DimensionMismatch);
}

TEST(Cholesky, QuadFormIsNonNegative) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const SymMatrix a = testing::random_spd(5, rng, 1e-6);
    EXPECT_GE(quad_form(chol_with_jitter(a), testing::random_vector(5, rng)), 0.0);
  }
}

TEST(DefaultJitter, ScalesWithDiagonal) {
  EXPECT_DOUBLE_EQ(default_jitter(Matrix::Identity(3, 3) * 4.0), 4e-8);
}

TEST(GammaRatio, AgreesWithLgammaForModerateArguments) {
  for (double x : {0.3, 1.0, 2.5, 7.0, 19.0, 21.0, 35.5, 120.0}) {
    for (double h : {0.5, 1.0, 2.5, 7.0}) {
      const double direct = std::lgamma(x + h) - std::lgamma(x);
      EXPECT_NEAR(log_gamma_ratio(x, h), direct, 1e-12 * std::max(1.0, std::abs(direct)))
          << "x=" << x << " h=" << h;
    }
  }
}

TEST(GammaRatio, IntegerShiftIsASumOfLogs) {
  for (double x : {3.0, 50.0, 1e6, 1e15}) {
    double expected = 0.0;
    for (int j = 0; j < 4; ++j) expected += std::log(x + j);
    EXPECT_NEAR(log_gamma_ratio(x, 4.0), expected, 1e-13 * std::abs(expected));
  }
}

TEST(GammaRatio, HalfShiftAtLargeArgument) {
  // log Gamma(x + 1/2) - log Gamma(x) = 1/2 log x - 1/(8x) + O(x^-3).
  for (double x : {1e6, 1e10, 1e16}) {
    EXPECT_NEAR(log_gamma_ratio(x, 0.5), 0.5 * std::log(x) - 0.125 / x, 1e-14 * std::log(x));
  }
}

TEST(DigammaDiff, MatchesDerivativeOfGammaRatio) {
  for (double x : {0.7, 5.0, 19.5, 20.5, 300.0}) {
    for (double h : {0.5, 3.0, 6.5}) {
      const double step = 1e-5 * x;
      const double fd = (log_gamma_ratio(x + step, h) - log_gamma_ratio(x - step, h)) / (2 * step);
      EXPECT_NEAR(digamma_diff(x, h), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(DigammaDiff, IntegerShiftIsAHarmonicSum) {
  for (double x : {2.0, 40.0, 1e8, 1e16}) {
    const double expected = 1.0 / x + 1.0 / (x + 1) + 1.0 / (x + 2);
    EXPECT_NEAR(digamma_diff(x, 3.0), expected, 1e-13 * expected);
  }
}

}  // namespace
}  // namespace etpr
