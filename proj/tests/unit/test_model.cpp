#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "etpr/errors.hpp"
#include "etpr/model.hpp"
#include "support.hpp"

namespace etpr {
namespace {

// Covariance built entry by entry from the kernel formula.
Matrix naive_cov(const EtprModel& m, std::size_t i, const Matrix& x) {
  const KernelParams& k = m.kernels[i];
  const Eigen::Index n = x.rows();
  Matrix s(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      double d2 = 0.0, lin = 0.0;
      for (Eigen::Index q = 0; q < x.cols(); ++q) {
        d2 += k.w[q] * (x(r, q) - x(c, q)) * (x(r, q) - x(c, q));
        lin += k.a[q] * x(r, q) * x(c, q);
      }
      s(r, c) = k.v * std::exp(-0.5 * d2) + lin + (r == c ? m.sigma_sq : 0.0);
    }
  }
  return s;
}

double naive_loglik(const EtprModel& m, const std::vector<CurveData>& data) {
  double total = 0.0;
  const double omega = m.nu - 1.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Matrix s = naive_cov(m, i, data[i].x);
    const Eigen::FullPivLU<Matrix> lu(s);
    const double n = static_cast<double>(data[i].n());
    const double q = data[i].y.dot(lu.solve(data[i].y));
    total += -0.5 * n * std::log(2 * std::numbers::pi * omega) - 0.5 * std::log(lu.determinant()) +
             std::lgamma(n / 2 + m.nu) - std::lgamma(m.nu) -
             (n / 2 + m.nu) * std::log(1 + q / (2 * omega));
  }
  return total;
}

double naive_gaussian(const EtprModel& m, const std::vector<CurveData>& data) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Matrix s = naive_cov(m, i, data[i].x);
    const Eigen::FullPivLU<Matrix> lu(s);
    const double n = static_cast<double>(data[i].n());
    total += -0.5 * (data[i].y.dot(lu.solve(data[i].y)) + std::log(lu.determinant()) +
                     n * std::log(2 * std::numbers::pi));
  }
  return total;
}

TEST(MarginalLoglik, MatchesNaiveDenseOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const auto p = static_cast<Eigen::Index>(1 + trial % 2);
    const auto data = testing::random_data(m, 3 + trial % 6, p, rng);
    const EtprModel model = testing::random_model(m, static_cast<std::size_t>(p), rng);
    EXPECT_NEAR(marginal_loglik(model, data), naive_loglik(model, data), 1e-9);
    EXPECT_NEAR(gaussian_loglik(model, data), naive_gaussian(model, data), 1e-9);
  }
}

TEST(MarginalLoglik, SinglePointReducesToScalarEmtd) {
  Rng rng(1);
  auto data = testing::random_data(1, 1, 1, rng);
  const EtprModel model = testing::random_model(1, 1, rng);
  EmtdSpec s;
  s.nu = model.nu;
  s.omega = model.nu - 1.0;
  s.mean = Vector::Zero(1);
  s.cov = Matrix::Constant(1, 1, model.sigma_sq + eval(model.kernels[0], data[0].x.row(0).transpose(),
                                                       data[0].x.row(0).transpose()));
  EXPECT_NEAR(marginal_loglik(model, data), logpdf(s, data[0].y), 1e-13);
}

TEST(MarginalLoglik, ConvergesToGaussianAsNuGrows) {
  Rng rng(5);
  const auto data = testing::random_data(2, 6, 1, rng);
  EtprModel model = testing::random_model(2, 1, rng);
  const double gauss = gaussian_loglik(model, data);
  double previous = std::numeric_limits<double>::infinity();
  for (double nu : {1e2, 1e4, 1e6}) {
    model.nu = nu;
    const double gap = std::abs(marginal_loglik(model, data) - gauss);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(LogPosterior, PriorPartDoesNotDependOnResponses) {
  Rng rng(6);
  auto data = testing::random_data(2, 5, 2, rng);
  const EtprModel model = testing::random_model(2, 2, rng);
  const PriorConfig priors;
  const double before = log_posterior(model, data, priors) - marginal_loglik(model, data);
  for (auto& c : data) c.y = testing::random_vector(c.n(), rng, 3.0);
  const double after = log_posterior(model, data, priors) - marginal_loglik(model, data);
  EXPECT_NEAR(before, after, 1e-12);
}

TEST(LogPosterior, AllExcludedAssembly) {
  Rng rng(7);
  const auto data = testing::random_data(1, 5, 1, rng);
  EtprModel model = testing::random_model(1, 1, rng);
  model.kernels[0].set_w_included(0, false, 0.0);
  model.kernels[0].set_a_included(0, false, 0.0);
  const PriorConfig pr;
  const double expected = marginal_loglik(model, data) +
                          log_prior(PriorComponent::kV, model.kernels[0].v, pr) +
                          log_prior(PriorComponent::kSigmaSq, model.sigma_sq, pr) +
                          log_prior(PriorComponent::kNu, model.nu, pr) + 2.0 * std::log(1.0 - pr.kappa);
  EXPECT_NEAR(log_posterior(model, data, pr), expected, 1e-12);
}

TEST(LogPosterior, IncludedTermsCarryKappa) {
  Rng rng(8);
  const auto data = testing::random_data(1, 4, 1, rng);
  const EtprModel model = testing::random_model(1, 1, rng);
  const PriorConfig pr;
  const KernelParams& k = model.kernels[0];
  const double expected = marginal_loglik(model, data) + log_prior(PriorComponent::kV, k.v, pr) +
                          log_prior(PriorComponent::kSigmaSq, model.sigma_sq, pr) +
                          log_prior(PriorComponent::kNu, model.nu, pr) + 2.0 * std::log(pr.kappa) +
                          log_prior(PriorComponent::kW, k.w[0], pr) +
                          log_prior(PriorComponent::kA, k.a[0], pr);
  EXPECT_NEAR(log_posterior(model, data, pr), expected, 1e-12);
}

void expect_gradient_matches(Objective objective, const EtprModel& model,
                             const std::vector<CurveData>& data, const PriorConfig& priors) {
  const ParamLayout layout(model, objective);
  const Vector theta = layout.pack(model);
  const Vector grad = objective_gradient(objective, model, data, priors);
  ASSERT_EQ(static_cast<std::size_t>(grad.size()), layout.size());
  const auto names = layout.names();
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = 1e-5;
    Vector up = theta, down = theta;
    up[j] += h;
    down[j] -= h;
    const double fd = (objective_value(objective, layout.unpack(up, model), data, priors) -
                       objective_value(objective, layout.unpack(down, model), data, priors)) /
                      (2 * h);
    EXPECT_NEAR(grad[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << names[static_cast<std::size_t>(j)];
  }
}

TEST(Gradient, MatchesFiniteDifferencesForEveryObjective) {
  Rng rng(41);
  const PriorConfig priors;
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const std::size_t p = 1 + trial % 3;
    const auto data = testing::random_data(m, 3 + trial % 6, static_cast<Eigen::Index>(p), rng);
    EtprModel model = testing::random_model(m, p, rng);
    if (trial % 4 == 1) model.kernels[0].set_w_included(0, false, 0.0);
    if (trial % 4 == 2) model.kernels[0].set_a_included(p - 1, false, 0.0);
    for (Objective o : {Objective::kGaussianLik, Objective::kEtprLik, Objective::kPosterior}) {
      expect_gradient_matches(o, model, data, priors);
    }
    EXPECT_EQ(grad_log_posterior(model, data, priors),
              objective_gradient(Objective::kPosterior, model, data, priors));
  }
}

TEST(Gradient, StableAtVeryLargeNu) {
  Rng rng(42);
  const auto data = testing::random_data(2, 6, 1, rng);
  EtprModel model = testing::random_model(2, 1, rng);
  for (double nu : {1e8, 1e14}) {
    model.nu = nu;
    const Vector g = objective_gradient(Objective::kEtprLik, model, data, PriorConfig{});
    // d/dlog(nu-1) decays like 1/nu in the Gaussian limit.
    EXPECT_LT(std::abs(g[1]), 1e3 / nu);
  }
}

TEST(ParamLayout, PackUnpackRoundTrip) {
  Rng rng(9);
  EtprModel model = testing::random_model(2, 2, rng);
  model.kernels[1].set_a_included(0, false, 0.0);
  const ParamLayout layout(model, Objective::kPosterior);
  EXPECT_EQ(layout.size(), 2u + 5u + 4u);
  const EtprModel back = layout.unpack(layout.pack(model), model);
  EXPECT_NEAR(back.nu, model.nu, 1e-12);
  EXPECT_NEAR(back.sigma_sq, model.sigma_sq, 1e-15);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LT((back.kernels[i].w - model.kernels[i].w).norm(), 1e-12);
    EXPECT_LT((back.kernels[i].a - model.kernels[i].a).norm(), 1e-12);
  }
  const auto names = layout.names();
  EXPECT_EQ(names.front(), "log_sigma_sq");
  EXPECT_EQ(names[1], "log_nu_minus_1");

  const ParamLayout gauss(model, Objective::kGaussianLik);
  EXPECT_EQ(gauss.size(), layout.size() - 1);
  EXPECT_TRUE(std::isinf(gauss.unpack(gauss.pack(model), model).nu));
}

TEST(Objective, OutsideDomainIsMinusInfinity) {
  Rng rng(10);
  const auto data = testing::random_data(1, 4, 1, rng);
  EtprModel model = testing::random_model(1, 1, rng);
  model.nu = 1.0 + 1e-9;
  EXPECT_EQ(objective_value(Objective::kEtprLik, model, data, PriorConfig{}),
            -std::numeric_limits<double>::infinity());
  model.nu = 2.0;
  model.sigma_sq = -1.0;
  EXPECT_EQ(objective_value(Objective::kPosterior, model, data, PriorConfig{}),
            -std::numeric_limits<double>::infinity());
}

TEST(Validation, CurveAndModel) {
  Rng rng(11);
  CurveData c = testing::random_curve("c", 4, 2, rng);
  EXPECT_NO_THROW(c.validate());
  c.y.resize(3);
  EXPECT_THROW(c.validate(), DimensionMismatch);

  EtprModel m = testing::random_model(1, 1, rng);
  EXPECT_NO_THROW(m.validate());
  m.sigma_sq = 0.0;
  EXPECT_THROW(m.validate(), ConfigInvalid);
}

}  // namespace
}  // namespace etpr
