#include "etpr/optimizer.hpp"

#include <cmath>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

struct Trial {
  Vector x;
  double value;
  Vector grad;
};

// Backtracks from a unit step along `dir` (an ascent direction).
bool line_search(const ObjectiveFn& fn, const Vector& x, double value, const Vector& grad,
                 const Vector& dir, Trial& out) {
  const double slope = grad.dot(dir);
  if (!(slope > 0.0)) return false;
  double t = 1.0;
  for (int k = 0; k < kMaxBacktracks; ++k, t *= 0.5) {
    Vector candidate = x + t * dir;
    Vector g(x.size());
    const double f = fn(candidate, &g);
    if (std::isfinite(f) && g.allFinite() && f >= value + kArmijo * t * slope && f > value) {
      out = Trial{std::move(candidate), f, std::move(g)};
      return true;
    }
  }
  return false;
}

Vector clip_step(Vector dir, double max_step) {
  const double len = dir.norm();
  if (len > max_step) dir *= max_step / len;
  return dir;
}

}  // namespace

AscentResult maximize_bfgs(const ObjectiveFn& fn, Vector x0, const AscentOptions& opts) {
  const Eigen::Index dim = x0.size();
  AscentResult res;
  res.x = std::move(x0);
  res.grad.resize(dim);
  res.value = fn(res.x, &res.grad);
  if (!std::isfinite(res.value) || !res.grad.allFinite()) {
    throw OptimizationFailed("objective is not finite at the starting point");
  }
  res.trace.push_back(res.value);

  // Inverse Hessian approximation of -f.
  Matrix h = Matrix::Identity(dim, dim);
  bool fresh = true;

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (res.grad.norm() < opts.grad_tol) {
      res.converged = true;
      break;
    }
    Trial next;
    Vector dir = clip_step(h * res.grad, opts.max_step);
    bool ok = line_search(fn, res.x, res.value, res.grad, dir, next);
    if (!ok && !fresh) {
      h.setIdentity();
      fresh = true;
      dir = clip_step(res.grad, opts.max_step);
      ok = line_search(fn, res.x, res.value, res.grad, dir, next);
    }
    if (!ok) break;

    const Vector s = next.x - res.x;
    const Vector y = res.grad - next.grad;  // gradient change of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) {
        h *= sy / y.squaredNorm();
        fresh = false;
      }
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(dim, dim);
      h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    res.x = std::move(next.x);
    res.value = next.value;
    res.grad = std::move(next.grad);
    res.trace.push_back(res.value);
  }
  if (!res.converged && res.grad.norm() < opts.grad_tol) res.converged = true;
  return res;
}

}  // namespace etpr
