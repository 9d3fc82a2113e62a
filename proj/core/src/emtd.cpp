#include "etpr/emtd.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void EmtdSpec::validate() const {
  if (!(nu > 1.0)) throw ConfigInvalid("EMTD requires nu > 1");
  if (!(omega > 0.0)) throw ConfigInvalid("EMTD requires omega > 0");
  if (cov.rows() != mean.size() || cov.cols() != mean.size() || mean.size() == 0) {
    throw DimensionMismatch("EMTD mean and covariance disagree on dimension");
  }
}

double logpdf(const EmtdSpec& spec, const PsdFactor& cov_factor, const Vector& z) {
  if (z.size() != spec.dim() || cov_factor.dim() != spec.dim()) {
    throw DimensionMismatch("EMTD logpdf: argument has wrong length");
  }
  const double n = static_cast<double>(spec.dim());
  const double q = quad_form(cov_factor, z - spec.mean);
  const double shape = 0.5 * n + spec.nu;
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * spec.omega) + cov_factor.log_det()) +
         log_gamma_ratio(spec.nu, 0.5 * n) - shape * std::log1p(q / (2.0 * spec.omega));
}

double logpdf(const EmtdSpec& spec, const Vector& z) {
  spec.validate();
  return logpdf(spec, chol_with_jitter(spec.cov), z);
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return scale / gamma(rng);
}

Vector sample(const EmtdSpec& spec, Rng& rng) {
  spec.validate();
  const PsdFactor factor = chol_with_jitter(spec.cov);
  const double r = sample_inverse_gamma(spec.nu, spec.omega, rng);
  std::normal_distribution<double> normal;
  Vector xi(spec.dim());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = normal(rng);
  return spec.mean + std::sqrt(r) * (factor.lower() * xi);
}

EmtdSpec marginal_leading(const EmtdSpec& spec, Eigen::Index count) {
  if (count < 1 || count > spec.dim()) throw DimensionMismatch("marginal: bad coordinate count");
  return EmtdSpec{spec.nu, spec.omega, spec.mean.head(count),
                  spec.cov.topLeftCorner(count, count)};
}

EmtdSpec condition_leading(const EmtdSpec& spec, const Vector& observed) {
  spec.validate();
  const Eigen::Index g = observed.size();
  const Eigen::Index d = spec.dim();
  if (g < 1 || g >= d) throw DimensionMismatch("condition: need 1 <= observed < dim");

  const Eigen::Index rest = d - g;
  const PsdFactor s11 = chol_with_jitter(spec.cov.topLeftCorner(g, g));
  const Vector centered = observed - spec.mean.head(g);
  const Matrix s12 = spec.cov.topRightCorner(g, rest);

  const Vector alpha = solve_psd(s11, centered);
  const double q = std::max(0.0, centered.dot(alpha));
  const Matrix schur = spec.cov.bottomRightCorner(rest, rest) - s12.transpose() * solve_psd(s11, s12);

  const double gd = static_cast<double>(g);
  EmtdSpec out;
  out.nu = spec.nu + 0.5 * gd;
  out.omega = spec.omega + 0.5 * gd;
  out.mean = spec.mean.tail(rest) + s12.transpose() * alpha;
  out.cov = (2.0 * spec.omega + q) / (2.0 * spec.omega + gd) * schur;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

EmtdSpec conditional(const EmtdSpec& spec, Eigen::Index k, const Vector& observed) {
  if (k - 1 < 1 || k - 1 >= spec.dim() || observed.size() != k - 1) {
    throw DimensionMismatch("conditional: need 1 <= k-1 < dim and k-1 observed values");
  }
  return condition_leading(marginal_leading(spec, k), observed);
}

void PriorConfig::validate() const {
  if (!(alpha1 > 0.0) || !(mu1 > 0.0)) throw ConfigInvalid("gamma prior needs alpha1, mu1 > 0");
  if (!(sigma2_sq > 0.0) || !(sigma3_sq > 0.0) || !(sigma4_sq > 0.0)) {
    throw ConfigInvalid("log-normal prior variances must be positive");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigInvalid("kappa must lie in (0, 1)");
}

double PriorConfig::w_rate() const {
  return gamma_convention == GammaConvention::kRate ? mu1 : 1.0 / mu1;
}

double normal_logpdf(double x, double mu, double s2) {
  const double z = x - mu;
  return -0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * z * z / s2;
}

double gamma_logpdf(double x, double alpha, double beta) {
  if (!(x > 0.0)) return kNegInf;
  return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * std::log(x) - beta * x;
}

namespace {

double log_normal_prior(double value, double mu, double s2) {
  return value > 0.0 ? normal_logpdf(std::log(value), mu, s2) : kNegInf;
}

}  // namespace

double log_prior(PriorComponent component, double value, const PriorConfig& prior) {
  switch (component) {
    case PriorComponent::kNu:
      return value >= 1.0 ? -2.0 * std::log(value) : kNegInf;
    case PriorComponent::kSigmaSq:
      return log_normal_prior(value, prior.mu4, prior.sigma4_sq);
    case PriorComponent::kV:
      return log_normal_prior(value, prior.mu3, prior.sigma3_sq);
    case PriorComponent::kW:
      return value > 0.0 ? gamma_logpdf(1.0 / value, prior.alpha1, prior.w_rate()) : kNegInf;
    case PriorComponent::kA:
      return log_normal_prior(value, prior.mu2, prior.sigma2_sq);
  }
  return kNegInf;
}

double dlog_prior_dlog(PriorComponent component, double value, const PriorConfig& prior) {
  auto lognormal = [value](double mu, double s2) { return -(std::log(value) - mu) / s2; };
  switch (component) {
    case PriorComponent::kNu:
      return (value - 1.0) * (-2.0 / value);
    case PriorComponent::kSigmaSq:
      return lognormal(prior.mu4, prior.sigma4_sq);
    case PriorComponent::kV:
      return lognormal(prior.mu3, prior.sigma3_sq);
    case PriorComponent::kW:
      return -(prior.alpha1 - 1.0) + prior.w_rate() / value;
    case PriorComponent::kA:
      return lognormal(prior.mu2, prior.sigma2_sq);
  }
  return 0.0;
}

}  // namespace etpr
