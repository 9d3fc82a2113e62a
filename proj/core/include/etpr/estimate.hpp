#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "etpr/model.hpp"

namespace etpr {

enum class Method { kGpr, kEtprMle, kBetprMap };

std::string to_string(Method method);
/// Accepts "gpr", "etpr", "betpr" (and the upper-case enum spellings).
/// Throws ConfigInvalid otherwise.
Method parse_method(const std::string& name);

Objective objective_of(Method method);

struct FitOptions {
  double grad_tol = 1e-5;
  int max_iter = 500;
  /// Random starts in addition to the supplied (or heuristic) initial point.
  int restarts = 5;
  std::uint64_t seed = 0;
  /// Worker threads for independent restarts / indicator refits.
  unsigned threads = 1;
  double tol_select = 1e-4;
  int max_sweeps = 10;
  /// Enumerate every indicator configuration when 2^(2 p m) is at most this.
  std::size_t exhaustive_limit = 256;
};

/// Inclusion indicators of one curve.
struct CurveMask {
  std::vector<bool> gamma;
  std::vector<bool> delta;
  bool operator==(const CurveMask&) const = default;
};

struct FitResult {
  EtprModel model;
  Method method = Method::kBetprMap;
  double objective = 0.0;
  std::vector<std::pair<int, double>> trace;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<CurveMask> mask;
  int restarts_used = 0;
};

/// Starting point from data: nu = 2, sigma^2 = 0.1 var(y), v_i = var(y_i),
/// w_iq = 1 / median squared pairwise distance of covariate q, a = 1e-2.
/// All indicators included.
EtprModel default_init(const std::vector<CurveData>& data);

/// Heuristic value used when an indicator is switched back on.
double default_w(const CurveData& curve, std::size_t q);
inline constexpr double kDefaultA = 1e-2;

std::vector<CurveMask> mask_of(const EtprModel& model);

FitResult fit_gpr(const std::vector<CurveData>& data, const std::optional<EtprModel>& init,
                  const FitOptions& opts);

FitResult fit_etpr_mle(const std::vector<CurveData>& data, const std::optional<EtprModel>& init,
                       const FitOptions& opts);

/// MAP under the hyper-priors. Indicators are taken from `init` (all included
/// when no init is given) and held fixed.
FitResult fit_betpr_map(const std::vector<CurveData>& data, const PriorConfig& priors,
                        const std::optional<EtprModel>& init, const FitOptions& opts);

FitResult fit(Method method, const std::vector<CurveData>& data, const PriorConfig& priors,
              const std::optional<EtprModel>& init, const FitOptions& opts);

/// Spike-and-slab indicator search on top of the MAP fit. Small problems are
/// solved by enumeration; otherwise a greedy toggle search runs until a full
/// sweep changes nothing or `max_sweeps` is reached.
FitResult select_spike_slab(const std::vector<CurveData>& data, const PriorConfig& priors,
                            const std::optional<EtprModel>& init, const FitOptions& opts);

/// Re-optimizes the continuous parameters of `start` with its masks held
/// fixed, from that single point.
FitResult refit_from(Method method, const std::vector<CurveData>& data,
                     const PriorConfig& priors, const EtprModel& start, const FitOptions& opts);

}  // namespace etpr
