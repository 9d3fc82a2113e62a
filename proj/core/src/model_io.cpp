#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "etpr/errors.hpp"
#include "etpr/io.hpp"
#include "json.hpp"

namespace etpr {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const FitResult& fit, const std::vector<std::string>& curve_ids) {
  const EtprModel& m = fit.model;
  if (curve_ids.size() != m.kernels.size()) throw DimensionMismatch("one id per curve required");
  json j;
  j["method"] = to_string(fit.method);
  j["nu"] = std::isfinite(m.nu) ? json(m.nu) : json(nullptr);
  j["sigma_sq"] = m.sigma_sq;
  j["objective"] = fit.objective;
  j["converged"] = fit.converged;
  j["curves"] = json::array();
  for (std::size_t i = 0; i < m.kernels.size(); ++i) {
    const KernelParams& k = m.kernels[i];
    j["curves"].push_back({{"id", curve_ids[i]},
                           {"v", k.v},
                           {"w", to_json(k.w)},
                           {"a", to_json(k.a)},
                           {"gamma", k.gamma},
                           {"delta", k.delta}});
  }
  return j.dump(2) + "\n";
}

StoredFit model_from_json(const std::string& text) {
  StoredFit out;
  try {
    const json j = json::parse(text);
    FitResult& fit = out.fit;
    fit.method = parse_method(j.at("method").get<std::string>());
    fit.model.nu = j.at("nu").is_null() ? std::numeric_limits<double>::infinity()
                                        : j.at("nu").get<double>();
    fit.model.sigma_sq = j.at("sigma_sq").get<double>();
    fit.objective = j.value("objective", std::numeric_limits<double>::quiet_NaN());
    fit.converged = j.value("converged", false);
    for (const auto& c : j.at("curves")) {
      KernelParams k;
      k.v = c.at("v").get<double>();
      k.w = vector_from(c.at("w"));
      k.a = vector_from(c.at("a"));
      k.gamma = c.at("gamma").get<std::vector<bool>>();
      k.delta = c.at("delta").get<std::vector<bool>>();
      k.validate();
      out.curve_ids.push_back(c.at("id").get<std::string>());
      fit.model.kernels.push_back(std::move(k));
    }
    fit.mask = mask_of(fit.model);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("model JSON: ") + e.what());
  }
  return out;
}

StoredFit load_model(const std::string& path) { return model_from_json(read_file(path)); }

std::string priors_to_json(const PriorConfig& p) {
  json j{{"alpha1", p.alpha1},       {"mu1", p.mu1},
         {"mu2", p.mu2},             {"sigma2_sq", p.sigma2_sq},
         {"mu3", p.mu3},             {"sigma3_sq", p.sigma3_sq},
         {"mu4", p.mu4},             {"sigma4_sq", p.sigma4_sq},
         {"kappa", p.kappa},
         {"gamma_convention", p.gamma_convention == GammaConvention::kRate ? "rate" : "scale"}};
  return j.dump(2) + "\n";
}

PriorConfig priors_from_json(const std::string& text) {
  PriorConfig p;
  try {
    const json j = json::parse(text);
    p.alpha1 = j.value("alpha1", p.alpha1);
    p.mu1 = j.value("mu1", p.mu1);
    p.mu2 = j.value("mu2", p.mu2);
    p.sigma2_sq = j.value("sigma2_sq", p.sigma2_sq);
    p.mu3 = j.value("mu3", p.mu3);
    p.sigma3_sq = j.value("sigma3_sq", p.sigma3_sq);
    p.mu4 = j.value("mu4", p.mu4);
    p.sigma4_sq = j.value("sigma4_sq", p.sigma4_sq);
    p.kappa = j.value("kappa", p.kappa);
    if (j.contains("gamma_convention")) {
      const auto conv = j.at("gamma_convention").get<std::string>();
      if (conv == "rate") {
        p.gamma_convention = GammaConvention::kRate;
      } else if (conv == "scale") {
        p.gamma_convention = GammaConvention::kScale;
      } else {
        throw ConfigInvalid("gamma_convention must be 'rate' or 'scale'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("priors JSON: ") + e.what());
  }
  p.validate();
  return p;
}

PriorConfig load_priors(const std::string& path) { return priors_from_json(read_file(path)); }

}  // namespace etpr
