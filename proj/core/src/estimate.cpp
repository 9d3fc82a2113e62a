#include "etpr/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "etpr/errors.hpp"
#include "etpr/optimizer.hpp"
#include "etpr/parallel.hpp"

namespace etpr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Half-width, in log units, of the random-start box around the heuristic
// initial point used by the likelihood-based fits.
constexpr double kBoxHalfWidth = 2.0;

double variance(const Vector& y) {
  if (y.size() < 2) return 1.0;
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double positive_or(double value, double fallback) {
  return (value > 0.0 && std::isfinite(value)) ? value : fallback;
}

void check_data(const std::vector<CurveData>& data) {
  if (data.empty()) throw ConfigInvalid("no curves to fit");
  for (const auto& c : data) {
    c.validate();
    if (c.p() != data.front().p()) throw InconsistentDimensions("curves disagree on p");
  }
}

// Projects `init` onto the method's domain: Gaussian fits carry nu = inf,
// the others need a finite nu above the floor.
EtprModel prepare_start(Method method, EtprModel model) {
  if (method == Method::kGpr) {
    model.nu = std::numeric_limits<double>::infinity();
  } else if (!std::isfinite(model.nu) || model.nu < kNuFloor) {
    model.nu = 2.0;
  }
  return model;
}

// Range of w covering length scales from the smallest gap between distinct
// covariate values up to the full covariate range.
std::pair<double, double> w_range(const CurveData& curve, std::size_t q) {
  std::vector<double> values(curve.x.col(static_cast<Eigen::Index>(q)).begin(),
                             curve.x.col(static_cast<Eigen::Index>(q)).end());
  std::sort(values.begin(), values.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < values.size(); ++j) {
    if (values[j] > values[j - 1]) gap = std::min(gap, values[j] - values[j - 1]);
  }
  const double range = values.empty() ? 0.0 : values.back() - values.front();
  if (!(range > 0.0) || !std::isfinite(gap)) return {1.0, 1.0};
  return {1.0 / (range * range), 1.0 / (gap * gap)};
}

EtprModel random_start(Method method, const EtprModel& base, const std::vector<CurveData>& data,
                       const PriorConfig& priors, Rng& rng) {
  EtprModel m = base;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (method == Method::kBetprMap) {
    std::normal_distribution<double> normal;
    auto lognormal = [&](double mu, double s2) { return std::exp(mu + std::sqrt(s2) * normal(rng)); };
    m.sigma_sq = lognormal(priors.mu4, priors.sigma4_sq);
    // pi(nu) = nu^-2 on [1, inf) is a Pareto(1, 1) law.
    m.nu = std::clamp(1.0 / std::max(unit(rng), 1e-12), 1.01, 100.0);
    for (auto& k : m.kernels) {
      k.v = lognormal(priors.mu3, priors.sigma3_sq);
      for (std::size_t q = 0; q < k.dim(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        if (k.gamma[q]) {
          std::gamma_distribution<double> gamma(priors.alpha1, 1.0);
          k.w[qi] = priors.w_rate() / gamma(rng);
        }
        if (k.delta[q]) k.a[qi] = lognormal(priors.mu2, priors.sigma2_sq);
      }
    }
    return m;
  }
  auto jitter = [&](double value) {
    return value * std::exp(kBoxHalfWidth * (2.0 * unit(rng) - 1.0));
  };
  m.sigma_sq = jitter(m.sigma_sq);
  if (method == Method::kEtprMle) m.nu = 1.0 + jitter(1.0);
  for (std::size_t i = 0; i < m.kernels.size(); ++i) {
    KernelParams& k = m.kernels[i];
    for (const ParamId& id : active_params(k)) {
      if (id.kind == ParamKind::kW) {
        const auto [lo, hi] = w_range(data[i], id.index);
        set_param_value(k, id, std::exp(std::log(lo) + unit(rng) * std::log(hi / lo)));
      } else {
        set_param_value(k, id, jitter(param_value(k, id)));
      }
    }
  }
  return m;
}

struct StartOutcome {
  bool ok = false;
  FitResult fit;
};

StartOutcome run_start(Method method, const std::vector<CurveData>& data,
                       const PriorConfig& priors, const EtprModel& start,
                       const FitOptions& opts) {
  const Objective objective = objective_of(method);
  const ParamLayout layout(start, objective);
  auto fn = [&](const Vector& theta, Vector* grad) -> double {
    EtprModel m;
    try {
      m = layout.unpack(theta, start);
    } catch (const Error&) {
      return kNegInf;
    }
    const double value = objective_value(objective, m, data, priors);
    if (!std::isfinite(value)) return kNegInf;
    if (grad != nullptr) {
      try {
        *grad = objective_gradient(objective, m, data, priors);
      } catch (const NotPositiveDefinite&) {
        return kNegInf;
      }
    }
    return value;
  };

  StartOutcome out;
  AscentResult ascent;
  try {
    ascent = maximize_bfgs(fn, layout.pack(start), AscentOptions{opts.grad_tol, opts.max_iter});
  } catch (const OptimizationFailed&) {
    return out;
  }
  FitResult& fit = out.fit;
  fit.model = layout.unpack(ascent.x, start);
  fit.method = method;
  fit.objective = ascent.value;
  fit.converged = ascent.converged;
  fit.grad_norm = ascent.grad.norm();
  for (std::size_t k = 0; k < ascent.trace.size(); ++k) {
    fit.trace.emplace_back(static_cast<int>(k), ascent.trace[k]);
  }
  fit.mask = mask_of(fit.model);
  out.ok = std::isfinite(fit.objective);
  return out;
}

FitResult multi_start(Method method, const std::vector<CurveData>& data,
                      const PriorConfig& priors, const std::optional<EtprModel>& init,
                      const FitOptions& opts) {
  check_data(data);
  if (method == Method::kBetprMap) priors.validate();
  EtprModel base = prepare_start(method, init ? *init : default_init(data));
  if (base.kernels.size() != data.size()) {
    throw DimensionMismatch("initial model has the wrong number of kernels");
  }
  for (const auto& k : base.kernels) k.validate();

  const std::size_t starts = 1 + static_cast<std::size_t>(std::max(0, opts.restarts));
  std::vector<EtprModel> points;
  points.push_back(base);
  for (std::size_t s = 1; s < starts; ++s) {
    Rng rng(mix_seed(opts.seed, s));
    points.push_back(random_start(method, base, data, priors, rng));
  }

  std::vector<StartOutcome> outcomes(starts);
  parallel_for(starts, opts.threads, [&](std::size_t s) {
    outcomes[s] = run_start(method, data, priors, points[s], opts);
  });

  const StartOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (o.ok && (best == nullptr || o.fit.objective > best->fit.objective)) best = &o;
  }
  if (best == nullptr) throw OptimizationFailed(to_string(method) + ": every start failed");
  FitResult result = best->fit;
  result.restarts_used = static_cast<int>(starts);
  return result;
}

EtprModel with_mask_index(const EtprModel& base, const std::vector<CurveData>& data,
                          std::uint64_t bits) {
  EtprModel m = base;
  std::size_t bit = 0;
  for (std::size_t i = 0; i < m.kernels.size(); ++i) {
    KernelParams& k = m.kernels[i];
    for (std::size_t q = 0; q < k.dim(); ++q, ++bit) {
      const bool on = ((bits >> bit) & 1U) == 0;
      const double value = k.gamma[q] ? k.w[static_cast<Eigen::Index>(q)] : default_w(data[i], q);
      k.set_w_included(q, on, value);
    }
    for (std::size_t q = 0; q < k.dim(); ++q, ++bit) {
      const bool on = ((bits >> bit) & 1U) == 0;
      const double value = k.delta[q] ? k.a[static_cast<Eigen::Index>(q)] : kDefaultA;
      k.set_a_included(q, on, value);
    }
  }
  return m;
}

FitResult exhaustive_search(const std::vector<CurveData>& data, const PriorConfig& priors,
                            const FitResult& full, std::size_t indicator_count,
                            const FitOptions& opts) {
  const std::size_t configs = std::size_t{1} << indicator_count;
  std::vector<std::optional<FitResult>> fits(configs);
  fits[0] = full;
  parallel_for(configs - 1, opts.threads, [&](std::size_t j) {
    const std::size_t bits = j + 1;
    try {
      fits[bits] = refit_from(Method::kBetprMap, data, priors,
                              with_mask_index(full.model, data, bits), opts);
    } catch (const OptimizationFailed&) {
    }
  });
  std::size_t best = 0;
  for (std::size_t b = 1; b < configs; ++b) {
    if (fits[b] && fits[b]->objective > fits[best]->objective) best = b;
  }
  FitResult out = *fits[best];
  out.restarts_used = full.restarts_used;
  return out;
}

FitResult greedy_search(const std::vector<CurveData>& data, const PriorConfig& priors,
                        FitResult incumbent, const FitOptions& opts) {
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < incumbent.model.kernels.size(); ++i) {
      const std::size_t p = incumbent.model.kernels[i].dim();
      for (std::size_t slot = 0; slot < 2 * p; ++slot) {
        EtprModel candidate = incumbent.model;
        KernelParams& k = candidate.kernels[i];
        const std::size_t q = slot % p;
        if (slot < p) {
          k.set_w_included(q, !k.gamma[q], default_w(data[i], q));
        } else {
          k.set_a_included(q, !k.delta[q], kDefaultA);
        }
        try {
          FitResult refit = refit_from(Method::kBetprMap, data, priors, candidate, opts);
          if (refit.objective > incumbent.objective + opts.tol_select) {
            refit.restarts_used = incumbent.restarts_used;
            incumbent = std::move(refit);
            changed = true;
          }
        } catch (const OptimizationFailed&) {
        }
      }
    }
    if (!changed) break;
  }
  return incumbent;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kGpr:
      return "GPR";
    case Method::kEtprMle:
      return "ETPR_MLE";
    case Method::kBetprMap:
      return "BETPR_MAP";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "gpr" || name == "GPR") return Method::kGpr;
  if (name == "etpr" || name == "ETPR" || name == "ETPR_MLE") return Method::kEtprMle;
  if (name == "betpr" || name == "BETPR" || name == "BETPR_MAP") return Method::kBetprMap;
  throw ConfigInvalid("unknown method '" + name + "'");
}

Objective objective_of(Method method) {
  switch (method) {
    case Method::kGpr:
      return Objective::kGaussianLik;
    case Method::kEtprMle:
      return Objective::kEtprLik;
    case Method::kBetprMap:
      return Objective::kPosterior;
  }
  return Objective::kPosterior;
}

double default_w(const CurveData& curve, std::size_t q) {
  const auto qi = static_cast<Eigen::Index>(q);
  std::vector<double> d2;
  for (Eigen::Index j = 0; j < curve.n(); ++j) {
    for (Eigen::Index l = j + 1; l < curve.n(); ++l) {
      const double d = curve.x(j, qi) - curve.x(l, qi);
      d2.push_back(d * d);
    }
  }
  const double med = median(std::move(d2));
  return med > 0.0 ? 1.0 / med : 1.0;
}

EtprModel default_init(const std::vector<CurveData>& data) {
  check_data(data);
  EtprModel m;
  m.nu = 2.0;
  double pooled = 0.0;
  for (const auto& c : data) pooled += variance(c.y);
  pooled /= static_cast<double>(data.size());
  m.sigma_sq = 0.1 * positive_or(pooled, 1.0);
  const auto p = static_cast<std::size_t>(data.front().p());
  for (const auto& c : data) {
    KernelParams k = KernelParams::all_included(p, positive_or(variance(c.y), 1.0), 1.0, kDefaultA);
    for (std::size_t q = 0; q < p; ++q) k.w[static_cast<Eigen::Index>(q)] = default_w(c, q);
    m.kernels.push_back(std::move(k));
  }
  return m;
}

std::vector<CurveMask> mask_of(const EtprModel& model) {
  std::vector<CurveMask> out;
  for (const auto& k : model.kernels) out.push_back({k.gamma, k.delta});
  return out;
}

FitResult refit_from(Method method, const std::vector<CurveData>& data,
                     const PriorConfig& priors, const EtprModel& start, const FitOptions& opts) {
  StartOutcome o = run_start(method, data, priors, prepare_start(method, start), opts);
  if (!o.ok) throw OptimizationFailed(to_string(method) + ": refit failed");
  o.fit.restarts_used = 1;
  return o.fit;
}

FitResult fit_gpr(const std::vector<CurveData>& data, const std::optional<EtprModel>& init,
                  const FitOptions& opts) {
  return multi_start(Method::kGpr, data, PriorConfig{}, init, opts);
}

FitResult fit_etpr_mle(const std::vector<CurveData>& data, const std::optional<EtprModel>& init,
                       const FitOptions& opts) {
  return multi_start(Method::kEtprMle, data, PriorConfig{}, init, opts);
}

FitResult fit_betpr_map(const std::vector<CurveData>& data, const PriorConfig& priors,
                        const std::optional<EtprModel>& init, const FitOptions& opts) {
  return multi_start(Method::kBetprMap, data, priors, init, opts);
}

FitResult fit(Method method, const std::vector<CurveData>& data, const PriorConfig& priors,
              const std::optional<EtprModel>& init, const FitOptions& opts) {
  switch (method) {
    case Method::kGpr:
      return fit_gpr(data, init, opts);
    case Method::kEtprMle:
      return fit_etpr_mle(data, init, opts);
    case Method::kBetprMap:
      return fit_betpr_map(data, priors, init, opts);
  }
  throw ConfigInvalid("unknown method");
}

FitResult select_spike_slab(const std::vector<CurveData>& data, const PriorConfig& priors,
                            const std::optional<EtprModel>& init, const FitOptions& opts) {
  check_data(data);
  EtprModel start = init ? *init : default_init(data);
  for (std::size_t i = 0; i < start.kernels.size() && i < data.size(); ++i) {
    KernelParams& k = start.kernels[i];
    for (std::size_t q = 0; q < k.dim(); ++q) {
      if (!k.gamma[q]) k.set_w_included(q, true, default_w(data[i], q));
      if (!k.delta[q]) k.set_a_included(q, true, kDefaultA);
    }
  }
  const FitResult full = fit_betpr_map(data, priors, start, opts);

  const std::size_t p = static_cast<std::size_t>(data.front().p());
  const std::size_t indicators = 2 * p * data.size();
  if (indicators < 63 && (std::size_t{1} << indicators) <= opts.exhaustive_limit) {
    return exhaustive_search(data, priors, full, indicators, opts);
  }
  return greedy_search(data, priors, full, opts);
}

}  // namespace etpr
