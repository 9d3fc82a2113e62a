#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "etpr/numerics.hpp"

namespace etpr {

/// Hyperparameters of one curve's covariance kernel
///
///   k(x, x') = v exp(-1/2 sum_q w_q (x_q - x'_q)^2) + sum_q a_q x_q x'_q
///
/// together with the inclusion indicators of the spike-and-slab prior:
/// `gamma[q]` switches w_q on, `delta[q]` switches a_q on. An excluded
/// parameter always holds exactly zero.
struct KernelParams {
  double v = 1.0;
  Vector w;
  Vector a;
  std::vector<bool> gamma;
  std::vector<bool> delta;

  /// All indicators on, w and a set to the given constants.
  static KernelParams all_included(std::size_t p, double v, double w, double a);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(w.size()); }

  /// Number of parameters that are free to move: v plus included w and a.
  std::size_t active_count() const;

  /// Throws ConfigInvalid when an invariant is broken.
  void validate() const;

  /// Sets indicator and zeroes the parameter when switched off. When switched
  /// on, the parameter is set to `value_if_on`.
  void set_w_included(std::size_t q, bool on, double value_if_on);
  void set_a_included(std::size_t q, bool on, double value_if_on);

  bool operator==(const KernelParams&) const = default;
};

enum class ParamKind { kV, kW, kA };

/// Names a single kernel hyperparameter within one curve.
struct ParamId {
  ParamKind kind;
  std::size_t index = 0;  // q for w/a, unused for v

  bool operator==(const ParamId&) const = default;
  std::string to_string() const;
};

/// Active parameter ids in the canonical order (v, w_1..w_p, a_1..a_p),
/// with excluded entries skipped.
std::vector<ParamId> active_params(const KernelParams& params);

double param_value(const KernelParams& params, ParamId id);
void set_param_value(KernelParams& params, ParamId id, double value);

double eval(const KernelParams& params, const Vector& x, const Vector& x2);

/// Gram matrix over the rows of `x`.
SymMatrix gram(const KernelParams& params, const Matrix& x);

/// Cross-covariance between rows of `x` and rows of `u`, shape rows(x) x rows(u).
Matrix cross_gram(const KernelParams& params, const Matrix& x, const Matrix& u);

/// dK/dtheta for every active parameter, in `active_params` order.
std::vector<std::pair<ParamId, Matrix>> grad_gram(const KernelParams& params, const Matrix& x);

}  // namespace etpr
