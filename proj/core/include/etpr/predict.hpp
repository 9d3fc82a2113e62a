#pragma once

#include <cstddef>
#include <vector>

#include "etpr/model.hpp"

namespace etpr {

/// Predictive law of f_i(u) given curve i's data: EMTD(df, df - 1, mean, variance)
/// with df = n/2 + nu. For a Gaussian fit (nu = inf) df is inf and
/// scale_mix is 1.
struct Predictive {
  double mean = 0.0;
  double variance = 0.0;
  double df = 0.0;
  double scale_mix = 1.0;
};

/// Posterior mean of the curve's mixing variable:
/// (y^T S^{-1} y + 2(nu - 1)) / (n + 2(nu - 1)), S = sigma^2 I + K.
double s0(const EtprModel& model, std::size_t curve_index, const CurveData& curve);

Predictive posterior_predictive(const EtprModel& model, std::size_t curve_index,
                                const CurveData& curve, const Vector& u);

/// Same as calling `posterior_predictive` for every row of `u`, sharing one
/// factorization of the training covariance.
std::vector<Predictive> predict_batch(const EtprModel& model, std::size_t curve_index,
                                      const CurveData& curve, const Matrix& u);

/// Variances in (-1e-10, 0) are clamped to zero; anything more negative is
/// reported as an Error.
inline constexpr double kVarianceClamp = 1e-10;

}  // namespace etpr
