#pragma once

#include <cstdint>
#include <random>

#include "etpr/numerics.hpp"

namespace etpr {

using Rng = std::mt19937_64;

/// Extended multivariate t distribution EMTD(nu, omega, mean, cov).
///
/// Equivalent to a Gaussian scale mixture: r ~ IG(nu, omega) (shape, scale),
/// z | r ~ N(mean, r cov). The density depends on (omega, cov) only through
/// the product omega * cov.
struct EmtdSpec {
  double nu = 2.0;
  double omega = 1.0;
  Vector mean;
  SymMatrix cov;

  Eigen::Index dim() const noexcept { return mean.size(); }

  /// Throws ConfigInvalid or DimensionMismatch.
  void validate() const;
};

double logpdf(const EmtdSpec& spec, const Vector& z);

/// Log density with a precomputed factor of `spec.cov`.
double logpdf(const EmtdSpec& spec, const PsdFactor& cov_factor, const Vector& z);

/// One hierarchical draw: inverse-gamma mixing variable, then a Gaussian.
Vector sample(const EmtdSpec& spec, Rng& rng);

/// Draw from IG(shape, scale).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

/// Marginal over the first `count` coordinates.
EmtdSpec marginal_leading(const EmtdSpec& spec, Eigen::Index count);

/// Distribution of the trailing `dim - observed.size()` coordinates given the
/// leading ones equal `observed`:
///   nu* = nu + g/2, omega* = omega + g/2,
///   mean* = h2 + S21 S11^{-1} (y - h1),
///   cov* = (2 omega + q) / (2 omega + g) * (S22 - S21 S11^{-1} S12)
/// with g the number of observed coordinates and q the Mahalanobis form of
/// the centered observation. Under omega = nu - 1 this keeps omega* = nu* - 1.
EmtdSpec condition_leading(const EmtdSpec& spec, const Vector& observed);

/// One-dimensional conditional of coordinate `k` (1-based) given the first
/// k-1 coordinates. Requires 1 <= k-1 < dim.
EmtdSpec conditional(const EmtdSpec& spec, Eigen::Index k, const Vector& observed);

/// How the gamma prior on 1/w reads its second parameter.
///   kRate:  1/w ~ Gamma(shape alpha1, rate mu1)
///   kScale: 1/w ~ Gamma(shape alpha1, scale mu1)
enum class GammaConvention { kRate, kScale };

/// Hyper-prior settings. Defaults are the simulation-study values:
/// 1/w ~ Gamma(2, 0.5), log a ~ N(-3, 9), log v ~ N(-3, 1),
/// log sigma^2 ~ N(-3, 9), kappa = 0.84.
struct PriorConfig {
  double alpha1 = 2.0;
  double mu1 = 0.5;
  double mu2 = -3.0;
  double sigma2_sq = 9.0;
  double mu3 = -3.0;
  double sigma3_sq = 1.0;
  double mu4 = -3.0;
  double sigma4_sq = 9.0;
  double kappa = 0.84;
  GammaConvention gamma_convention = GammaConvention::kRate;

  void validate() const;

  /// Rate of the gamma law on 1/w implied by the convention.
  double w_rate() const;
};

enum class PriorComponent { kNu, kSigmaSq, kV, kW, kA };

/// Log prior density of one parameter, taken on the scale the prior is stated
/// for: a normal density of log(value) for sigma^2, v and a, a gamma density
/// of 1/w for w, and the unnormalized -2 log nu on [1, inf) for nu.
/// Out-of-support values give -inf.
double log_prior(PriorComponent component, double value, const PriorConfig& prior);

/// d log_prior / d log(value) for kSigmaSq, kV, kW, kA, and
/// d log_prior / d log(nu - 1) for kNu.
double dlog_prior_dlog(PriorComponent component, double value, const PriorConfig& prior);

/// Log of the normal density with mean mu and variance s2.
double normal_logpdf(double x, double mu, double s2);

/// Log of the gamma density with shape alpha and rate beta.
double gamma_logpdf(double x, double alpha, double beta);

}  // namespace etpr
