#pragma once

#include <functional>
#include <vector>

#include "etpr/numerics.hpp"

namespace etpr {

struct AscentOptions {
  double grad_tol = 1e-5;
  int max_iter = 500;
  /// Upper bound on the Euclidean length of a single step.
  double max_step = 5.0;
};

struct AscentResult {
  Vector x;
  double value = 0.0;
  Vector grad;
  int iterations = 0;
  bool converged = false;
  /// Objective after every accepted step, starting with the initial point.
  std::vector<double> trace;
};

/// Returns f(x); fills `grad` when it is non-null. Non-finite values mark a
/// point as outside the domain.
using ObjectiveFn = std::function<double(const Vector& x, Vector* grad)>;

/// BFGS ascent with a backtracking Armijo line search. Every accepted step
/// increases the objective, so `trace` is non-decreasing. Throws
/// OptimizationFailed if the starting point is outside the domain.
AscentResult maximize_bfgs(const ObjectiveFn& fn, Vector x0, const AscentOptions& opts);

}  // namespace etpr
