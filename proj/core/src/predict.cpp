#include "etpr/predict.hpp"

#include <cmath>
#include <limits>

#include "etpr/errors.hpp"

namespace etpr {

namespace {

const KernelParams& kernel_for(const EtprModel& model, std::size_t curve_index,
                               const CurveData& curve) {
  if (curve_index >= model.kernels.size()) {
    throw UnknownCurveId("no kernel for curve index " + std::to_string(curve_index));
  }
  curve.validate();
  const KernelParams& k = model.kernels[curve_index];
  if (static_cast<Eigen::Index>(k.dim()) != curve.p()) {
    throw DimensionMismatch("kernel and curve disagree on p");
  }
  return k;
}

double mixing_mean(double nu, double q, double n) {
  if (!std::isfinite(nu)) return 1.0;
  const double two_omega = 2.0 * (nu - 1.0);
  return (q + two_omega) / (n + two_omega);
}

}  // namespace

double s0(const EtprModel& model, std::size_t curve_index, const CurveData& curve) {
  const KernelParams& k = kernel_for(model, curve_index, curve);
  const PsdFactor f = chol_with_jitter(noisy_gram(model.sigma_sq, k, curve.x));
  return mixing_mean(model.nu, quad_form(f, curve.y), static_cast<double>(curve.n()));
}

std::vector<Predictive> predict_batch(const EtprModel& model, std::size_t curve_index,
                                      const CurveData& curve, const Matrix& u) {
  const KernelParams& k = kernel_for(model, curve_index, curve);
  if (u.cols() != curve.p()) throw DimensionMismatch("query points have the wrong width");

  const PsdFactor f = chol_with_jitter(noisy_gram(model.sigma_sq, k, curve.x));
  const Vector alpha = solve_psd(f, curve.y);
  const double n = static_cast<double>(curve.n());
  const double scale = mixing_mean(model.nu, std::max(0.0, curve.y.dot(alpha)), n);
  const double df = std::isfinite(model.nu) ? 0.5 * n + model.nu
                                            : std::numeric_limits<double>::infinity();

  const Matrix cross = cross_gram(k, curve.x, u);
  const Matrix whitened = f.lower().triangularView<Eigen::Lower>().solve(cross);

  std::vector<Predictive> out;
  out.reserve(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index j = 0; j < u.rows(); ++j) {
    const Vector uj = u.row(j).transpose();
    double reduced = eval(k, uj, uj) - whitened.col(j).squaredNorm();
    if (reduced < 0.0) {
      if (reduced < -kVarianceClamp) {
        throw Error("predictive variance is negative beyond round-off");
      }
      reduced = 0.0;
    }
    out.push_back(Predictive{cross.col(j).dot(alpha), scale * reduced, df, scale});
  }
  return out;
}

Predictive posterior_predictive(const EtprModel& model, std::size_t curve_index,
                                const CurveData& curve, const Vector& u) {
  return predict_batch(model, curve_index, curve, Matrix(u.transpose())).front();
}

}  // namespace etpr
