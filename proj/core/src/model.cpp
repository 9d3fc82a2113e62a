#include "etpr/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_pairing(const EtprModel& model, const std::vector<CurveData>& data) {
  if (model.kernels.size() != data.size()) {
    throw DimensionMismatch("model has " + std::to_string(model.kernels.size()) +
                            " kernels for " + std::to_string(data.size()) + " curves");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i].validate();
    if (static_cast<Eigen::Index>(model.kernels[i].dim()) != data[i].p()) {
      throw DimensionMismatch("kernel " + std::to_string(i) + " has the wrong covariate count");
    }
  }
}

PriorComponent component_of(ParamKind kind) {
  switch (kind) {
    case ParamKind::kV:
      return PriorComponent::kV;
    case ParamKind::kW:
      return PriorComponent::kW;
    case ParamKind::kA:
      return PriorComponent::kA;
  }
  return PriorComponent::kV;
}

bool params_positive(const EtprModel& model) {
  if (!(model.sigma_sq > 0.0) || !std::isfinite(model.sigma_sq)) return false;
  for (const auto& k : model.kernels) {
    for (const ParamId& id : active_params(k)) {
      const double value = param_value(k, id);
      if (!(value > 0.0) || !std::isfinite(value)) return false;
    }
  }
  return true;
}

// Likelihood gradient in layout coordinates. `tail_parameter` selects the
// EMTD path; otherwise the Gaussian density is differentiated.
Vector likelihood_gradient(const EtprModel& model, const std::vector<CurveData>& data,
                           const ParamLayout& layout, bool tail_parameter) {
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  Eigen::Index slot = layout.has_nu() ? 2 : 1;
  const double nu = model.nu;
  const double omega = nu - 1.0;

  for (std::size_t i = 0; i < data.size(); ++i) {
    const CurveData& curve = data[i];
    const KernelParams& kernel = model.kernels[i];
    const double n = static_cast<double>(curve.n());

    const PsdFactor factor = chol_with_jitter(noisy_gram(model.sigma_sq, kernel, curve.x));
    const Matrix inv = inverse_psd(factor);
    const Vector alpha = inv * curve.y;
    const double q = std::max(0.0, curve.y.dot(alpha));
    const double coef = tail_parameter ? (0.5 * n + nu) / (2.0 * omega + q) : 0.5;

    grad[0] += model.sigma_sq * (-0.5 * inv.trace() + coef * alpha.squaredNorm());

    if (tail_parameter) {
      const double shape = 0.5 * n + nu;
      const double dnu = -n / (2.0 * omega) + digamma_diff(nu, 0.5 * n) -
                         std::log1p(q / (2.0 * omega)) + shape * q / (omega * (2.0 * omega + q));
      grad[1] += omega * dnu;
    }

    for (const auto& [id, dk] : grad_gram(kernel, curve.x)) {
      const double d = -0.5 * inv.cwiseProduct(dk).sum() + coef * alpha.dot(dk * alpha);
      grad[slot++] += param_value(kernel, id) * d;
    }
  }
  return grad;
}

Vector prior_gradient(const EtprModel& model, const ParamLayout& layout,
                      const PriorConfig& priors) {
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  grad[0] = dlog_prior_dlog(PriorComponent::kSigmaSq, model.sigma_sq, priors);
  grad[1] = dlog_prior_dlog(PriorComponent::kNu, model.nu, priors);
  Eigen::Index slot = 2;
  for (const KernelParams& k : model.kernels) {
    for (const ParamId& id : active_params(k)) {
      grad[slot++] = dlog_prior_dlog(component_of(id.kind), param_value(k, id), priors);
    }
  }
  return grad;
}

}  // namespace

void CurveData::validate() const {
  if (y.size() < 1) throw DimensionMismatch("curve " + id + " has no observations");
  if (x.rows() != y.size()) throw DimensionMismatch("curve " + id + ": rows(X) != length(y)");
  if (t.size() != 0 && t.size() != y.size()) {
    throw DimensionMismatch("curve " + id + ": length(t) != length(y)");
  }
}

void EtprModel::validate() const {
  if (!(nu > 1.0)) throw ConfigInvalid("model requires nu > 1");
  if (!(sigma_sq > 0.0)) throw ConfigInvalid("model requires sigma_sq > 0");
  if (kernels.empty()) throw ConfigInvalid("model needs at least one kernel");
  for (const auto& k : kernels) k.validate();
}

ParamLayout::ParamLayout(const EtprModel& shape, Objective objective)
    : has_nu_(objective != Objective::kGaussianLik) {
  size_ = has_nu_ ? 2 : 1;
  for (const auto& k : shape.kernels) {
    curves_.push_back(active_params(k));
    size_ += curves_.back().size();
  }
}

Vector ParamLayout::pack(const EtprModel& model) const {
  Vector theta(static_cast<Eigen::Index>(size_));
  Eigen::Index slot = 0;
  theta[slot++] = std::log(model.sigma_sq);
  if (has_nu_) theta[slot++] = std::log(model.nu - 1.0);
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    for (const ParamId& id : curves_[i]) theta[slot++] = std::log(param_value(model.kernels[i], id));
  }
  return theta;
}

EtprModel ParamLayout::unpack(const Vector& theta, const EtprModel& shape) const {
  if (static_cast<std::size_t>(theta.size()) != size_) {
    throw DimensionMismatch("parameter vector has the wrong length");
  }
  EtprModel model = shape;
  Eigen::Index slot = 0;
  model.sigma_sq = std::exp(theta[slot++]);
  if (has_nu_) {
    model.nu = 1.0 + std::exp(theta[slot++]);
  } else {
    model.nu = std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    for (const ParamId& id : curves_[i]) set_param_value(model.kernels[i], id, std::exp(theta[slot++]));
  }
  return model;
}

std::vector<std::string> ParamLayout::names() const {
  std::vector<std::string> out{"log_sigma_sq"};
  if (has_nu_) out.emplace_back("log_nu_minus_1");
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    for (const ParamId& id : curves_[i]) {
      out.push_back("curve" + std::to_string(i) + ".log_" + id.to_string());
    }
  }
  return out;
}

SymMatrix noisy_gram(double sigma_sq, const KernelParams& kernel, const Matrix& x) {
  SymMatrix s = gram(kernel, x);
  s.diagonal().array() += sigma_sq;
  return s;
}

double marginal_loglik(const EtprModel& model, const std::vector<CurveData>& data) {
  check_pairing(model, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CurveData& curve = data[i];
    EmtdSpec spec{model.nu, model.omega(), Vector::Zero(curve.n()),
                  noisy_gram(model.sigma_sq, model.kernels[i], curve.x)};
    total += logpdf(spec, curve.y);
  }
  return total;
}

double gaussian_loglik(const EtprModel& model, const std::vector<CurveData>& data) {
  check_pairing(model, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CurveData& curve = data[i];
    const PsdFactor f = chol_with_jitter(noisy_gram(model.sigma_sq, model.kernels[i], curve.x));
    const double n = static_cast<double>(curve.n());
    total += -0.5 * (quad_form(f, curve.y) + f.log_det() + n * std::log(2.0 * std::numbers::pi));
  }
  return total;
}

double log_prior_total(const EtprModel& model, const PriorConfig& priors) {
  double total = log_prior(PriorComponent::kNu, model.nu, priors) +
                 log_prior(PriorComponent::kSigmaSq, model.sigma_sq, priors);
  const double log_in = std::log(priors.kappa);
  const double log_out = std::log1p(-priors.kappa);
  for (const KernelParams& k : model.kernels) {
    total += log_prior(PriorComponent::kV, k.v, priors);
    for (std::size_t q = 0; q < k.dim(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      total += k.gamma[q] ? log_in + log_prior(PriorComponent::kW, k.w[qi], priors) : log_out;
      total += k.delta[q] ? log_in + log_prior(PriorComponent::kA, k.a[qi], priors) : log_out;
    }
  }
  return total;
}

double log_posterior(const EtprModel& model, const std::vector<CurveData>& data,
                     const PriorConfig& priors) {
  const double prior = log_prior_total(model, priors);
  if (!std::isfinite(prior)) return kNegInf;
  return marginal_loglik(model, data) + prior;
}

Vector grad_log_posterior(const EtprModel& model, const std::vector<CurveData>& data,
                          const PriorConfig& priors) {
  return objective_gradient(Objective::kPosterior, model, data, priors);
}

double objective_value(Objective objective, const EtprModel& model,
                       const std::vector<CurveData>& data, const PriorConfig& priors) {
  if (!params_positive(model)) return kNegInf;
  if (objective != Objective::kGaussianLik && !(model.nu >= kNuFloor && std::isfinite(model.nu))) {
    return kNegInf;
  }
  try {
    switch (objective) {
      case Objective::kGaussianLik:
        return gaussian_loglik(model, data);
      case Objective::kEtprLik:
        return marginal_loglik(model, data);
      case Objective::kPosterior:
        return log_posterior(model, data, priors);
    }
  } catch (const NotPositiveDefinite&) {
    return kNegInf;
  }
  return kNegInf;
}

Vector objective_gradient(Objective objective, const EtprModel& model,
                          const std::vector<CurveData>& data, const PriorConfig& priors) {
  check_pairing(model, data);
  const ParamLayout layout(model, objective);
  if (objective == Objective::kGaussianLik) return likelihood_gradient(model, data, layout, false);
  Vector grad = likelihood_gradient(model, data, layout, true);
  if (objective == Objective::kPosterior) grad += prior_gradient(model, layout, priors);
  return grad;
}

}  // namespace etpr
