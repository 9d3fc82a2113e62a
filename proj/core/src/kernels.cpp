#include "etpr/kernels.hpp"

#include <cmath>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

void check_dims(const KernelParams& params, Eigen::Index p) {
  if (params.w.size() != p || params.a.size() != p) {
    throw DimensionMismatch("kernel has " + std::to_string(params.w.size()) +
                            " covariates, input has " + std::to_string(p));
  }
}

// Weighted squared distance over included length-scales only; skipping
// excluded columns makes masking identical to deleting the column.
double weighted_sq_dist(const KernelParams& params, const auto& x, const auto& x2) {
  double s = 0.0;
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    if (!params.gamma[q]) continue;
    const double d = x[q] - x2[q];
    s += params.w[q] * d * d;
  }
  return s;
}

double linear_term(const KernelParams& params, const auto& x, const auto& x2) {
  double s = 0.0;
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    if (!params.delta[q]) continue;
    s += params.a[q] * x[q] * x2[q];
  }
  return s;
}

double eval_rows(const KernelParams& params, const auto& x, const auto& x2) {
  return params.v * std::exp(-0.5 * weighted_sq_dist(params, x, x2)) + linear_term(params, x, x2);
}

}  // namespace

KernelParams KernelParams::all_included(std::size_t p, double v, double w, double a) {
  KernelParams k;
  k.v = v;
  k.w = Vector::Constant(static_cast<Eigen::Index>(p), w);
  k.a = Vector::Constant(static_cast<Eigen::Index>(p), a);
  k.gamma.assign(p, true);
  k.delta.assign(p, true);
  return k;
}

std::size_t KernelParams::active_count() const {
  std::size_t n = 1;
  for (bool g : gamma) n += g ? 1 : 0;
  for (bool d : delta) n += d ? 1 : 0;
  return n;
}

void KernelParams::validate() const {
  const auto p = static_cast<std::size_t>(w.size());
  if (static_cast<std::size_t>(a.size()) != p || gamma.size() != p || delta.size() != p) {
    throw ConfigInvalid("kernel parameter vectors disagree on p");
  }
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigInvalid("kernel v must be positive");
  for (std::size_t q = 0; q < p; ++q) {
    if (!(w[q] >= 0.0) || !(a[q] >= 0.0)) throw ConfigInvalid("kernel w and a must be >= 0");
    if (!gamma[q] && w[q] != 0.0) throw ConfigInvalid("excluded w must be zero");
    if (!delta[q] && a[q] != 0.0) throw ConfigInvalid("excluded a must be zero");
  }
}

void KernelParams::set_w_included(std::size_t q, bool on, double value_if_on) {
  gamma[q] = on;
  w[q] = on ? value_if_on : 0.0;
}

void KernelParams::set_a_included(std::size_t q, bool on, double value_if_on) {
  delta[q] = on;
  a[q] = on ? value_if_on : 0.0;
}

std::string ParamId::to_string() const {
  switch (kind) {
    case ParamKind::kV:
      return "v";
    case ParamKind::kW:
      return "w" + std::to_string(index + 1);
    case ParamKind::kA:
      return "a" + std::to_string(index + 1);
  }
  return "?";
}

std::vector<ParamId> active_params(const KernelParams& params) {
  std::vector<ParamId> ids{{ParamKind::kV, 0}};
  for (std::size_t q = 0; q < params.gamma.size(); ++q) {
    if (params.gamma[q]) ids.push_back({ParamKind::kW, q});
  }
  for (std::size_t q = 0; q < params.delta.size(); ++q) {
    if (params.delta[q]) ids.push_back({ParamKind::kA, q});
  }
  return ids;
}

double param_value(const KernelParams& params, ParamId id) {
  switch (id.kind) {
    case ParamKind::kV:
      return params.v;
    case ParamKind::kW:
      return params.w[static_cast<Eigen::Index>(id.index)];
    case ParamKind::kA:
      return params.a[static_cast<Eigen::Index>(id.index)];
  }
  return 0.0;
}

void set_param_value(KernelParams& params, ParamId id, double value) {
  switch (id.kind) {
    case ParamKind::kV:
      params.v = value;
      break;
    case ParamKind::kW:
      params.w[static_cast<Eigen::Index>(id.index)] = value;
      break;
    case ParamKind::kA:
      params.a[static_cast<Eigen::Index>(id.index)] = value;
      break;
  }
}

double eval(const KernelParams& params, const Vector& x, const Vector& x2) {
  check_dims(params, x.size());
  if (x2.size() != x.size()) throw DimensionMismatch("kernel inputs differ in length");
  return eval_rows(params, x, x2);
}

SymMatrix gram(const KernelParams& params, const Matrix& x) {
  check_dims(params, x.cols());
  const Eigen::Index n = x.rows();
  if (n < 1) throw DimensionMismatch("gram needs at least one row");
  SymMatrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l <= j; ++l) {
      const double value = eval_rows(params, x.row(j), x.row(l));
      k(j, l) = value;
      k(l, j) = value;
    }
  }
  return k;
}

Matrix cross_gram(const KernelParams& params, const Matrix& x, const Matrix& u) {
  check_dims(params, x.cols());
  if (u.cols() != x.cols()) throw DimensionMismatch("query points have the wrong width");
  Matrix k(x.rows(), u.rows());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (Eigen::Index l = 0; l < u.rows(); ++l) k(j, l) = eval_rows(params, x.row(j), u.row(l));
  }
  return k;
}

std::vector<std::pair<ParamId, Matrix>> grad_gram(const KernelParams& params, const Matrix& x) {
  check_dims(params, x.cols());
  const Eigen::Index n = x.rows();
  if (n < 1) throw DimensionMismatch("gram needs at least one row");

  Matrix se(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = 0; l <= j; ++l) {
      se(j, l) = se(l, j) = std::exp(-0.5 * weighted_sq_dist(params, x.row(j), x.row(l)));
    }
  }

  std::vector<std::pair<ParamId, Matrix>> out;
  for (const ParamId& id : active_params(params)) {
    const auto q = static_cast<Eigen::Index>(id.index);
    switch (id.kind) {
      case ParamKind::kV:
        out.emplace_back(id, se);
        break;
      case ParamKind::kW: {
        Matrix d(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
          for (Eigen::Index l = 0; l <= j; ++l) {
            const double diff = x(j, q) - x(l, q);
            d(j, l) = d(l, j) = -0.5 * diff * diff * params.v * se(j, l);
          }
        }
        out.emplace_back(id, std::move(d));
        break;
      }
      case ParamKind::kA:
        out.emplace_back(id, x.col(q) * x.col(q).transpose());
        break;
    }
  }
  return out;
}

}  // namespace etpr
