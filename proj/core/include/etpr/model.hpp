#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "etpr/emtd.hpp"
#include "etpr/kernels.hpp"
#include "etpr/numerics.hpp"

namespace etpr {

/// One observed curve: covariates `x` (n x p), responses `y` (n) and the
/// grid positions `t` the observations were taken at.
struct CurveData {
  std::string id;
  Vector t;
  Matrix x;
  Vector y;

  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index p() const noexcept { return x.cols(); }

  void validate() const;
  bool operator==(const CurveData&) const = default;
};

/// Shared tail parameter nu and noise variance sigma_sq, plus one kernel per
/// curve. The mixing scale is tied to the tail parameter (omega = nu - 1).
/// A Gaussian-process fit stores nu = +inf.
struct EtprModel {
  double nu = 2.0;
  double sigma_sq = 0.1;
  std::vector<KernelParams> kernels;

  void validate() const;
  double omega() const noexcept { return nu - 1.0; }
};

/// Which objective a fit maximizes.
enum class Objective {
  kGaussianLik,  ///< Gaussian log marginal likelihood (nu fixed at infinity)
  kEtprLik,      ///< eTPR log marginal likelihood over nu, sigma^2, kernels
  kPosterior,    ///< eTPR log posterior with the spike-and-slab hyper-priors
};

/// Maps the active parameters of a model to an unconstrained vector:
///   [log sigma^2, log(nu - 1) (unless Gaussian), then per curve the logs of
///    the active kernel parameters in (v, w.., a..) order].
class ParamLayout {
 public:
  ParamLayout(const EtprModel& shape, Objective objective);

  std::size_t size() const noexcept { return size_; }
  bool has_nu() const noexcept { return has_nu_; }
  const std::vector<std::vector<ParamId>>& curve_params() const noexcept { return curves_; }

  Vector pack(const EtprModel& model) const;

  /// Writes `theta` into a copy of `shape`. Masks come from `shape`.
  EtprModel unpack(const Vector& theta, const EtprModel& shape) const;

  std::vector<std::string> names() const;

 private:
  bool has_nu_;
  std::size_t size_;
  std::vector<std::vector<ParamId>> curves_;
};

/// Smallest admissible nu; anything below is outside the objective's domain.
inline constexpr double kNuFloor = 1.0 + 1e-6;

/// Noise-plus-kernel covariance sigma^2 I + K of one curve.
SymMatrix noisy_gram(double sigma_sq, const KernelParams& kernel, const Matrix& x);

/// Sum over curves of the EMTD(nu, nu - 1, 0, sigma^2 I + K_i) log density.
double marginal_loglik(const EtprModel& model, const std::vector<CurveData>& data);

/// Sum over curves of the Gaussian N(0, sigma^2 I + K_i) log density. Written
/// independently of the EMTD path; `model.nu` is ignored.
double gaussian_loglik(const EtprModel& model, const std::vector<CurveData>& data);

/// Log prior of every parameter, including the Bernoulli inclusion terms:
/// an excluded w or a contributes log(1 - kappa), an included one log(kappa)
/// plus its slab density.
double log_prior_total(const EtprModel& model, const PriorConfig& priors);

/// marginal_loglik + log_prior_total; -inf when any parameter is outside the
/// prior support.
double log_posterior(const EtprModel& model, const std::vector<CurveData>& data,
                     const PriorConfig& priors);

/// Analytic gradient of `log_posterior` in `ParamLayout(model, kPosterior)`
/// coordinates.
Vector grad_log_posterior(const EtprModel& model, const std::vector<CurveData>& data,
                          const PriorConfig& priors);

/// Value of the chosen objective; -inf outside its domain.
double objective_value(Objective objective, const EtprModel& model,
                       const std::vector<CurveData>& data, const PriorConfig& priors);

/// Gradient of the chosen objective in `ParamLayout(model, objective)` order.
Vector objective_gradient(Objective objective, const EtprModel& model,
                          const std::vector<CurveData>& data, const PriorConfig& priors);

}  // namespace etpr
