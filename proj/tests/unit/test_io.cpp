#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "etpr/errors.hpp"
#include "etpr/io.hpp"
#include "support.hpp"

namespace etpr {
namespace {

TEST(CurvesCsv, RoundTrip) {
  Rng rng(1);
  auto curves = testing::random_data(3, 4, 2, rng);
  std::stringstream ss;
  write_curves(curves, ss);
  const auto back = parse_curves(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].id, curves[i].id);
    EXPECT_EQ(back[i].x, curves[i].x);
    EXPECT_EQ(back[i].y, curves[i].y);
  }
}

TEST(CurvesCsv, CrlfAndGroupingByFirstAppearance) {
  std::stringstream ss(
      "curve_id,t,x1,y\r\n"
      "b,0,0,1\r\n"
      "a,0,0,2\r\n"
      "b,1,1,3\r\n"
      "\r\n"
      "a,1,1,4\r\n");
  const auto curves = parse_curves(ss);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].id, "b");
  EXPECT_EQ(curves[0].y, (Vector(2) << 1, 3).finished());
  EXPECT_EQ(curves[1].id, "a");
  EXPECT_EQ(curves[1].x(1, 0), 1.0);
}

std::size_t error_line(const std::string& text) {
  std::stringstream ss(text);
  try {
    parse_curves(ss);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(CurvesCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("id,t,x1,y\n"), 1u);
  EXPECT_EQ(error_line("curve_id,t,x2,y\n"), 1u);
  EXPECT_EQ(error_line("curve_id,t,x1,y\na,0,0,1\na,1,1\n"), 3u);
  EXPECT_EQ(error_line("curve_id,t,x1,y\na,0,0,1\na,1,zz,2\n"), 3u);
  EXPECT_EQ(error_line("curve_id,t,x1,y\n,0,0,1\n"), 2u);
  EXPECT_EQ(error_line("curve_id,t,x1,y\na,0,,1\n"), 2u);
}

TEST(QueriesCsv, Parse) {
  std::stringstream ss("curve_id,x1,x2\nc1,0.5,1\nc2,2,3\n");
  const auto rows = parse_queries(ss);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].curve_id, "c2");
  EXPECT_EQ(rows[1].x[1], 3.0);
  std::stringstream bad("curve_id,x1\nc1,0.5,1\n");
  EXPECT_THROW(parse_queries(bad), ParseError);
}

TEST(ModelJson, RoundTrip) {
  Rng rng(2);
  FitResult fit;
  fit.method = Method::kBetprMap;
  fit.model = testing::random_model(2, 2, rng);
  fit.model.kernels[1].set_a_included(0, false, 0.0);
  fit.objective = -12.5;
  fit.converged = true;
  const StoredFit back = model_from_json(model_to_json(fit, {"c1", "c2"}));
  EXPECT_EQ(back.curve_ids, (std::vector<std::string>{"c1", "c2"}));
  EXPECT_EQ(back.fit.method, fit.method);
  EXPECT_EQ(back.fit.model.nu, fit.model.nu);
  EXPECT_EQ(back.fit.model.sigma_sq, fit.model.sigma_sq);
  EXPECT_EQ(back.fit.model.kernels, fit.model.kernels);
  EXPECT_EQ(back.fit.objective, -12.5);
  EXPECT_TRUE(back.fit.converged);
  EXPECT_FALSE(back.fit.mask[1].delta[0]);
}

TEST(ModelJson, GaussianTailIsNull) {
  Rng rng(3);
  FitResult fit;
  fit.method = Method::kGpr;
  fit.model = testing::random_model(1, 1, rng);
  fit.model.nu = std::numeric_limits<double>::infinity();
  const std::string text = model_to_json(fit, {"only"});
  EXPECT_NE(text.find("\"nu\": null"), std::string::npos);
  EXPECT_TRUE(std::isinf(model_from_json(text).fit.model.nu));
  EXPECT_THROW(model_to_json(fit, {}), DimensionMismatch);
  EXPECT_THROW(model_from_json("{\"method\": \"gpr\"}"), ConfigInvalid);
  EXPECT_THROW(model_from_json("not json"), ConfigInvalid);
}

TEST(PriorsJson, PartialAndRoundTrip) {
  const PriorConfig p = priors_from_json("{\"kappa\": 0.5, \"gamma_convention\": \"scale\"}");
  EXPECT_EQ(p.kappa, 0.5);
  EXPECT_EQ(p.gamma_convention, GammaConvention::kScale);
  EXPECT_EQ(p.mu2, PriorConfig{}.mu2);
  const PriorConfig q = priors_from_json(priors_to_json(p));
  EXPECT_EQ(q.kappa, p.kappa);
  EXPECT_EQ(q.alpha1, p.alpha1);
  EXPECT_EQ(q.gamma_convention, p.gamma_convention);
  EXPECT_THROW(priors_from_json("{\"gamma_convention\": \"shape\"}"), ConfigInvalid);
  EXPECT_THROW(priors_from_json("{\"kappa\": 2}"), ConfigInvalid);
}

}  // namespace
}  // namespace etpr
