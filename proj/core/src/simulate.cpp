#include "etpr/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "etpr/errors.hpp"
#include "etpr/parallel.hpp"
#include "etpr/predict.hpp"

namespace etpr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMaxFailureRate = 0.2;
// Cases 3, 4 and 6 draw their mixing variables from IG(2, 2).
constexpr double kEtpShape = 2.0;
constexpr double kEtpScale = 2.0;

Vector linspace(double lo, double hi, std::size_t count) {
  return Vector::LinSpaced(static_cast<Eigen::Index>(count), lo, hi);
}

Vector std_normal(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

bool has_selection_truth(int case_id) { return case_id == 5 || case_id == 6; }

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  // Deviations are rescaled first: unbounded likelihood estimates of nu can
  // be large enough for their squares to overflow.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x - mean));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double ss = 0.0;
  for (double x : v) ss += ((x - mean) / scale) * ((x - mean) / scale);
  return scale * std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> log_errors(const EtprModel& fit, const KernelParams& truth) {
  std::vector<double> out;
  for (const auto& k : fit.kernels) {
    out.push_back(std::abs(std::log(k.v) - std::log(truth.v)));
    for (std::size_t q = 0; q < truth.dim(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      if (truth.w[qi] > 0.0 && k.w[qi] > 0.0) out.push_back(std::abs(std::log(k.w[qi] / truth.w[qi])));
      if (truth.a[qi] > 0.0 && k.a[qi] > 0.0) out.push_back(std::abs(std::log(k.a[qi] / truth.a[qi])));
    }
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParseError(line, "bad number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError(line, "bad number '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ParseError(line, "number out of range '" + s + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

SimConfig SimConfig::for_case(int case_id) {
  SimConfig c;
  c.case_id = case_id;
  if (case_id >= 5) {
    c.p = 3;
    c.beta0 = KernelParams::all_included(3, 0.5, 0.0, 0.0);
    c.beta0.w << 1.0, 0.0, 0.0;
    c.beta0.a << 0.5, 0.0, 0.0;
    c.beta0.gamma = {true, false, false};
    c.beta0.delta = {true, false, false};
  } else {
    c.p = 1;
    c.beta0 = KernelParams::all_included(1, 0.025, 2.0, 0.025);
  }
  c.inject_outlier = case_id == 1 || case_id == 3 || case_id == 4;
  return c;
}

void SimConfig::validate() const {
  if (case_id < 1 || case_id > 6) throw ConfigInvalid("case must be in 1..6");
  if (m < 1) throw ConfigInvalid("need at least one curve");
  if (n_train < 1 || n_train >= n_total) throw ConfigInvalid("need 1 <= n_train < n_total");
  if (reps < 1) throw ConfigInvalid("need at least one replication");
  if (p != (case_id >= 5 ? 3u : 1u)) throw ConfigInvalid("p does not match the case");
  if (beta0.dim() != p) throw ConfigInvalid("beta0 does not match p");
  beta0.validate();
  if (!(sigma0_sq >= 0.0)) throw ConfigInvalid("sigma0_sq must be nonnegative");
}

std::vector<CurveData> Dataset::training() const {
  std::vector<CurveData> out;
  for (const auto& c : curves) {
    CurveData d;
    d.id = c.data.id;
    const auto n = static_cast<Eigen::Index>(c.train.size());
    d.t.resize(n);
    d.x.resize(n, c.data.p());
    d.y.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto src = static_cast<Eigen::Index>(c.train[static_cast<std::size_t>(j)]);
      d.t[j] = c.data.t[src];
      d.x.row(j) = c.data.x.row(src);
      d.y[j] = c.data.y[src];
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<CurveData> Dataset::testing() const {
  std::vector<CurveData> out;
  for (const auto& c : curves) {
    CurveData d;
    d.id = c.data.id;
    const auto n = static_cast<Eigen::Index>(c.test.size());
    d.t.resize(n);
    d.x.resize(n, c.data.p());
    d.y.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto src = static_cast<Eigen::Index>(c.test[static_cast<std::size_t>(j)]);
      d.t[j] = c.data.t[src];
      d.x.row(j) = c.data.x.row(src);
      d.y[j] = c.data.y[src];
    }
    out.push_back(std::move(d));
  }
  return out;
}

Dataset gen_case(const SimConfig& config, Rng& rng) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n_total);
  const double sigma = std::sqrt(config.sigma0_sq);

  Dataset ds;
  ds.truth = config.beta0;
  ds.sigma0_sq = config.sigma0_sq;
  for (std::size_t i = 0; i < config.m; ++i) {
    SimCurve curve;
    curve.data.id = "c" + std::to_string(i + 1);
    curve.data.x.resize(n, static_cast<Eigen::Index>(config.p));
    if (config.p == 1) {
      curve.data.x.col(0) = linspace(0.0, 3.0, config.n_total);
    } else {
      curve.data.x.col(0) = linspace(5.0, 10.0, config.n_total);
      const double sd = std::sqrt(0.1);
      for (Eigen::Index q = 1; q < curve.data.x.cols(); ++q) {
        curve.data.x.col(q) = sd * std_normal(n, rng);
      }
    }
    curve.data.t = curve.data.x.col(0);

    const PsdFactor kf = chol_with_jitter(gram(config.beta0, curve.data.x));
    const Vector g = kf.lower() * std_normal(n, rng);
    Vector noise = sigma * std_normal(n, rng);

    double f_scale = 1.0;
    switch (config.case_id) {
      case 1:
      case 5:
        break;
      case 2: {
        std::student_t_distribution<double> t2(2.0);
        for (Eigen::Index j = 0; j < n; ++j) noise[j] = sigma * t2(rng);
        break;
      }
      case 3:
      case 6: {
        const double r_signal = sample_inverse_gamma(kEtpShape, kEtpScale, rng);
        const double r_noise = sample_inverse_gamma(kEtpShape, kEtpScale, rng);
        f_scale = std::sqrt(r_signal);
        noise *= std::sqrt(r_noise);
        break;
      }
      case 4: {
        const double r = sample_inverse_gamma(kEtpShape, kEtpScale, rng);
        f_scale = std::sqrt(r);
        noise *= std::sqrt(r);
        break;
      }
      default:
        throw ConfigInvalid("case must be in 1..6");
    }
    curve.f = f_scale * g;
    curve.data.y = curve.f + noise;

    std::vector<std::size_t> order(config.n_total);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    curve.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.n_train));
    curve.test.assign(order.begin() + static_cast<std::ptrdiff_t>(config.n_train), order.end());
    std::sort(curve.train.begin(), curve.train.end());
    std::sort(curve.test.begin(), curve.test.end());
    ds.curves.push_back(std::move(curve));
  }
  return ds;
}

OutlierDraws OutlierDraws::from(Rng& rng) {
  OutlierDraws d;
  d.pick = [&rng](std::size_t count) {
    std::uniform_int_distribution<std::size_t> u(0, count - 1);
    return u(rng);
  };
  d.heavy_tail = [&rng] {
    std::student_t_distribution<double> t2(2.0);
    return t2(rng);
  };
  return d;
}

Dataset inject_outlier(Dataset dataset, OutlierScope scope, OutlierDraws draws) {
  auto perturb = [&](std::size_t i) {
    SimCurve& c = dataset.curves[i];
    if (c.train.empty()) return;
    const std::size_t idx = c.train[draws.pick(c.train.size())];
    c.data.y[static_cast<Eigen::Index>(idx)] += draws.heavy_tail();
    dataset.outlier_positions.emplace_back(i, idx);
  };
  if (dataset.curves.empty()) return dataset;
  if (scope == OutlierScope::kPerCurve) {
    for (std::size_t i = 0; i < dataset.curves.size(); ++i) perturb(i);
  } else {
    perturb(draws.pick(dataset.curves.size()));
  }
  return dataset;
}

Dataset inject_outlier(Dataset dataset, OutlierScope scope, Rng& rng) {
  return inject_outlier(std::move(dataset), scope, OutlierDraws::from(rng));
}

std::string to_string(StudyMethod method) {
  switch (method) {
    case StudyMethod::kGpr:
      return "GPR";
    case StudyMethod::kEtpr:
      return "ETPR";
    case StudyMethod::kBetpr:
      return "BETPR";
    case StudyMethod::kBetprVs:
      return "BETPR_VS";
  }
  return "?";
}

StudyMethod parse_study_method(const std::string& name) {
  if (name == "GPR" || name == "gpr") return StudyMethod::kGpr;
  if (name == "ETPR" || name == "etpr") return StudyMethod::kEtpr;
  if (name == "BETPR" || name == "betpr") return StudyMethod::kBetpr;
  if (name == "BETPR_VS" || name == "betpr_vs") return StudyMethod::kBetprVs;
  throw ConfigInvalid("unknown study method '" + name + "'");
}

double test_mse(const Dataset& dataset, const Predictor& predictor) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < dataset.curves.size(); ++i) {
    const SimCurve& c = dataset.curves[i];
    if (c.test.empty()) continue;
    Matrix u(static_cast<Eigen::Index>(c.test.size()), c.data.p());
    for (std::size_t j = 0; j < c.test.size(); ++j) {
      u.row(static_cast<Eigen::Index>(j)) = c.data.x.row(static_cast<Eigen::Index>(c.test[j]));
    }
    const Vector pred = predictor(i, u);
    for (std::size_t j = 0; j < c.test.size(); ++j) {
      const double r = c.data.y[static_cast<Eigen::Index>(c.test[j])] - pred[static_cast<Eigen::Index>(j)];
      sum += r * r;
      ++count;
    }
  }
  if (count == 0) throw ConfigInvalid("dataset has no test points");
  return sum / static_cast<double>(count);
}

std::pair<double, double> selection_accuracy(const KernelParams& truth,
                                             const std::vector<CurveMask>& masks) {
  std::size_t hit_w = 0, hit_a = 0, total = 0;
  for (const auto& m : masks) {
    for (std::size_t q = 0; q < truth.dim(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      hit_w += (m.gamma.at(q) == (truth.w[qi] > 0.0)) ? 1 : 0;
      hit_a += (m.delta.at(q) == (truth.a[qi] > 0.0)) ? 1 : 0;
      ++total;
    }
  }
  if (total == 0) return {kNaN, kNaN};
  return {static_cast<double>(hit_w) / static_cast<double>(total),
          static_cast<double>(hit_a) / static_cast<double>(total)};
}

ReplicationRecord run_replication(const SimConfig& config, const std::set<StudyMethod>& methods,
                                  Rng& rng, std::size_t rep_index) {
  Dataset ds = gen_case(config, rng);
  if (config.inject_outlier) ds = inject_outlier(std::move(ds), config.outlier_scope, rng);
  const std::vector<CurveData> train = ds.training();

  FitOptions opts = config.fit;
  opts.seed = rng();
  opts.threads = 1;

  ReplicationRecord record;
  record.rep = rep_index;
  for (StudyMethod method : methods) {
    MethodRecord r;
    r.method = method;
    r.nu_hat = kNaN;
    r.acc_w = kNaN;
    r.acc_a = kNaN;
    try {
      FitResult fit;
      switch (method) {
        case StudyMethod::kGpr:
          fit = fit_gpr(train, std::nullopt, opts);
          break;
        case StudyMethod::kEtpr:
          fit = fit_etpr_mle(train, std::nullopt, opts);
          break;
        case StudyMethod::kBetpr:
          fit = fit_betpr_map(train, config.priors, std::nullopt, opts);
          break;
        case StudyMethod::kBetprVs:
          fit = select_spike_slab(train, config.priors, std::nullopt, opts);
          break;
      }
      r.mse = test_mse(ds, [&](std::size_t i, const Matrix& u) {
        const auto preds = predict_batch(fit.model, i, train[i], u);
        Vector mean(static_cast<Eigen::Index>(preds.size()));
        for (std::size_t j = 0; j < preds.size(); ++j) mean[static_cast<Eigen::Index>(j)] = preds[j].mean;
        return mean;
      });
      if (method != StudyMethod::kGpr) r.nu_hat = fit.model.nu;
      if (has_selection_truth(config.case_id)) {
        std::tie(r.acc_w, r.acc_a) = selection_accuracy(ds.truth, fit.mask);
      }
      r.log_errors = log_errors(fit.model, ds.truth);
    } catch (const Error&) {
      r.failed = true;
      r.mse = kNaN;
    }
    record.methods.push_back(std::move(r));
  }
  return record;
}

const MethodSummary& StudySummary::at(StudyMethod method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw ConfigInvalid("method " + to_string(method) + " was not part of the study");
}

std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord>& records) {
  std::vector<MethodSummary> out;
  auto slot = [&](StudyMethod m) -> MethodSummary& {
    for (auto& s : out) {
      if (s.method == m) return s;
    }
    out.push_back(MethodSummary{m});
    return out.back();
  };
  std::vector<std::vector<double>> mse, nu, accw, acca;
  for (const auto& rec : records) {
    for (const auto& r : rec.methods) slot(r.method);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.method < b.method; });
  mse.resize(out.size());
  nu.resize(out.size());
  accw.resize(out.size());
  acca.resize(out.size());
  for (const auto& rec : records) {
    for (const auto& r : rec.methods) {
      const auto k = static_cast<std::size_t>(&slot(r.method) - out.data());
      if (r.failed) {
        ++out[k].failures;
        continue;
      }
      ++out[k].ok;
      mse[k].push_back(r.mse);
      if (!std::isnan(r.nu_hat)) nu[k].push_back(r.nu_hat);
      if (!std::isnan(r.acc_w)) accw[k].push_back(r.acc_w);
      if (!std::isnan(r.acc_a)) acca[k].push_back(r.acc_a);
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    MethodSummary& s = out[k];
    s.mse_mean = mean_of(mse[k]);
    s.mse_sd = sample_sd(mse[k], s.mse_mean);
    s.nu_mean = mean_of(nu[k]);
    s.nu_sd = nu[k].empty() ? kNaN : sample_sd(nu[k], s.nu_mean);
    s.acc_w_mean = mean_of(accw[k]);
    s.acc_a_mean = mean_of(acca[k]);
    s.degenerate = s.ok < 2;
  }
  return out;
}

StudySummary run_study(const SimConfig& config, const std::set<StudyMethod>& methods) {
  config.validate();
  if (methods.empty()) throw ConfigInvalid("no methods requested");
  StudySummary summary;
  summary.config = config;
  summary.records.resize(config.reps);
  parallel_for(config.reps, config.threads, [&](std::size_t rep) {
    Rng rng(mix_seed(config.seed, rep));
    summary.records[rep] = run_replication(config, methods, rng, rep);
  });
  summary.methods = summarize(summary.records);
  for (const auto& s : summary.methods) {
    const double total = static_cast<double>(s.ok + s.failures);
    if (static_cast<double>(s.failures) > kMaxFailureRate * total) {
      throw StudyFailed(to_string(s.method) + ": " + std::to_string(s.failures) + " of " +
                        std::to_string(s.ok + s.failures) + " replications failed");
    }
  }
  return summary;
}

void write_summary_csv(const StudySummary& summary, std::ostream& out) {
  out << "method,ok,failures,mse_mean,mse_sd,nu_mean,nu_sd,acc_w,acc_a,degenerate\n";
  for (const auto& s : summary.methods) {
    out << to_string(s.method) << ',' << s.ok << ',' << s.failures << ','
        << format_double(s.mse_mean) << ',' << format_double(s.mse_sd) << ','
        << format_double(s.nu_mean) << ',' << format_double(s.nu_sd) << ','
        << format_double(s.acc_w_mean) << ',' << format_double(s.acc_a_mean) << ','
        << (s.degenerate ? 1 : 0) << '\n';
  }
}

void write_summary_text(const StudySummary& summary, std::ostream& out) {
  const SimConfig& c = summary.config;
  out << "case " << c.case_id << "  m=" << c.m << "  n=" << c.n_train << "/" << c.n_total
      << "  reps=" << c.reps << "  seed=" << c.seed
      << "  outlier=" << (c.inject_outlier ? "yes" : "no") << '\n';
  write_method_table(summary.methods, out);
}

void write_method_table(const std::vector<MethodSummary>& methods, std::ostream& out) {
  auto cell = [](double mean, double sd) {
    if (std::isnan(mean)) return std::string("-");
    std::ostringstream ss;
    if (std::abs(mean) >= 1e4) {
      ss << std::scientific << std::setprecision(2);
    } else {
      ss << std::fixed << std::setprecision(3);
    }
    ss << mean << " (" << sd << ")";
    return ss.str();
  };
  auto pct = [](double v) {
    if (std::isnan(v)) return std::string("-");
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << 100.0 * v << "%";
    return ss.str();
  };
  out << std::left << std::setw(10) << "method" << std::setw(18) << "MSE (sd)" << std::setw(22)
      << "nu (sd)" << std::setw(9) << "acc_w" << std::setw(9) << "acc_a" << "failed\n";
  for (const auto& s : methods) {
    out << std::left << std::setw(10) << to_string(s.method) << std::setw(18)
        << cell(s.mse_mean, s.mse_sd) << std::setw(22) << cell(s.nu_mean, s.nu_sd)
        << std::setw(9) << pct(s.acc_w_mean) << std::setw(9) << pct(s.acc_a_mean)
        << s.failures << (s.degenerate ? "  (degenerate: fewer than 2 reps)" : "") << '\n';
  }
}

void write_records_csv(const std::vector<ReplicationRecord>& records, std::ostream& out) {
  out << "rep,method,failed,mse,nu_hat,acc_w,acc_a\n";
  for (const auto& rec : records) {
    for (const auto& r : rec.methods) {
      out << rec.rep << ',' << to_string(r.method) << ',' << (r.failed ? 1 : 0) << ','
          << format_double(r.mse) << ',' << format_double(r.nu_hat) << ','
          << format_double(r.acc_w) << ',' << format_double(r.acc_a) << '\n';
    }
  }
}

std::vector<ReplicationRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "rep,method,failed,mse,nu_hat,acc_w,acc_a") throw ParseError(1, "unexpected header");

  std::vector<ReplicationRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 7) throw ParseError(line_no, "expected 7 fields");
    const auto rep = static_cast<std::size_t>(parse_double(cells[0], line_no));
    MethodRecord r;
    try {
      r.method = parse_study_method(cells[1]);
    } catch (const ConfigInvalid& e) {
      throw ParseError(line_no, e.what());
    }
    r.failed = cells[2] == "1";
    r.mse = parse_double(cells[3], line_no);
    r.nu_hat = parse_double(cells[4], line_no);
    r.acc_w = parse_double(cells[5], line_no);
    r.acc_a = parse_double(cells[6], line_no);
    if (out.empty() || out.back().rep != rep) out.push_back(ReplicationRecord{rep, {}});
    out.back().methods.push_back(std::move(r));
  }
  return out;
}

}  // namespace etpr
