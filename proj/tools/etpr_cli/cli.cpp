#include "etpr_cli/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include "CLI11.hpp"
#include "etpr/errors.hpp"
#include "etpr/io.hpp"
#include "etpr/predict.hpp"

namespace etpr::cli {

namespace {

void configure_logging() {
  static const bool done = [] {
    auto logger = spdlog::stderr_logger_st("etpr");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[etpr %l] %v");
    const char* env = std::getenv("ETPR_LOG");
    const std::string level = env ? env : "info";
    if (level == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else if (level == "quiet") {
      spdlog::set_level(spdlog::level::off);
    } else {
      spdlog::set_level(spdlog::level::info);
    }
    return true;
  }();
  (void)done;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

FitOptions fit_options(const RunConfig& c) {
  FitOptions opts;
  opts.seed = c.seed;
  opts.threads = c.threads;
  return opts;
}

// Reorders a stored model so its kernels line up with `curves`.
EtprModel align_to(const StoredFit& stored, const std::vector<CurveData>& curves) {
  EtprModel m = stored.fit.model;
  m.kernels.clear();
  for (const auto& c : curves) {
    const auto it = std::find(stored.curve_ids.begin(), stored.curve_ids.end(), c.id);
    if (it == stored.curve_ids.end()) throw UnknownCurveId("model has no curve '" + c.id + "'");
    m.kernels.push_back(stored.fit.model.kernels[static_cast<std::size_t>(it - stored.curve_ids.begin())]);
  }
  return m;
}

std::vector<StudyMethod> default_methods(int case_id) {
  if (case_id >= 5) return {StudyMethod::kEtpr, StudyMethod::kBetpr, StudyMethod::kBetprVs};
  return {StudyMethod::kGpr, StudyMethod::kEtpr, StudyMethod::kBetpr};
}

}  // namespace

int cmd_fit(const RunConfig& c, std::ostream& out) {
  const Method method = parse_method(c.model);
  if (c.select && method != Method::kBetprMap) {
    throw ConfigInvalid("--select requires --model betpr");
  }
  const auto curves = parse_curves(c.data_path);
  spdlog::info("read {} curves from {}", curves.size(), c.data_path);

  std::optional<EtprModel> init;
  FitOptions opts = fit_options(c);
  if (!c.init_path.empty()) {
    init = align_to(load_model(c.init_path), curves);
    opts.restarts = 0;
  }

  const FitResult fit = c.select ? select_spike_slab(curves, c.priors, init, opts)
                                 : etpr::fit(method, curves, c.priors, init, opts);
  std::vector<std::string> ids;
  for (const auto& curve : curves) ids.push_back(curve.id);
  const std::string text = model_to_json(fit, ids);
  if (c.out_path.empty()) {
    out << text;
  } else {
    open_out(c.out_path) << text;
  }
  out << "method=" << to_string(fit.method) << (c.select ? "+select" : "")
      << " objective=" << format_double(fit.objective)
      << " converged=" << (fit.converged ? "yes" : "no") << '\n';
  return kExitOk;
}

int cmd_predict(const RunConfig& c, std::ostream& out) {
  const auto curves = parse_curves(c.data_path);
  const StoredFit stored = load_model(c.fit_path);
  const auto queries = parse_queries(c.query_path);

  std::map<std::string, std::size_t> kernel_of;
  for (std::size_t i = 0; i < stored.curve_ids.size(); ++i) kernel_of[stored.curve_ids[i]] = i;
  std::map<std::string, std::size_t> curve_of;
  for (std::size_t i = 0; i < curves.size(); ++i) curve_of[curves[i].id] = i;

  const std::size_t p = stored.fit.model.kernels.empty() ? 0 : stored.fit.model.kernels.front().dim();

  // Group query rows per curve so each curve shares one factorization.
  std::map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t r = 0; r < queries.size(); ++r) {
    const auto& q = queries[r];
    if (!kernel_of.count(q.curve_id) || !curve_of.count(q.curve_id)) {
      throw UnknownCurveId("unknown curve_id '" + q.curve_id + "' in query file");
    }
    if (static_cast<std::size_t>(q.x.size()) != p) {
      throw InconsistentDimensions("query has " + std::to_string(q.x.size()) +
                                   " covariates, model has " + std::to_string(p));
    }
    rows_of[q.curve_id].push_back(r);
  }
  std::vector<Predictive> preds(queries.size());
  for (const auto& [id, rows] : rows_of) {
    Matrix u(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < rows.size(); ++j) u.row(static_cast<Eigen::Index>(j)) = queries[rows[j]].x.transpose();
    const auto batch = predict_batch(stored.fit.model, kernel_of.at(id), curves[curve_of.at(id)], u);
    for (std::size_t j = 0; j < rows.size(); ++j) preds[rows[j]] = batch[j];
  }

  std::ofstream file;
  if (!c.out_path.empty()) file = open_out(c.out_path);
  std::ostream& sink = c.out_path.empty() ? out : file;
  sink << "curve_id";
  for (std::size_t q = 0; q < p; ++q) sink << ",x" << q + 1;
  sink << ",mean,variance,df\n";
  for (std::size_t r = 0; r < queries.size(); ++r) {
    sink << queries[r].curve_id;
    for (Eigen::Index q = 0; q < queries[r].x.size(); ++q) sink << ',' << format_double(queries[r].x[q]);
    sink << ',' << format_double(preds[r].mean) << ',' << format_double(preds[r].variance) << ','
         << format_double(preds[r].df) << '\n';
  }
  spdlog::info("wrote {} predictions", queries.size());
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  c.sim.validate();
  std::set<StudyMethod> methods;
  if (c.methods.empty()) {
    for (auto m : default_methods(c.sim.case_id)) methods.insert(m);
  } else {
    for (const auto& name : c.methods) methods.insert(parse_study_method(name));
  }
  spdlog::info("simulating case {} with m={} reps={} seed={}", c.sim.case_id, c.sim.m, c.sim.reps,
               c.sim.seed);
  const StudySummary summary = run_study(c.sim, methods);
  if (!c.out_path.empty()) {
    auto file = open_out(c.out_path);
    write_summary_csv(summary, file);
  }
  if (!c.records_path.empty()) {
    auto file = open_out(c.records_path);
    write_records_csv(summary.records, file);
  }
  write_summary_text(summary, out);
  return kExitOk;
}

int cmd_report(const RunConfig& c, std::ostream& out) {
  std::ifstream in(c.data_path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + c.data_path);
  const auto records = read_records_csv(in);
  StudySummary summary;
  summary.records = records;
  summary.methods = summarize(records);
  if (!c.out_path.empty()) {
    auto file = open_out(c.out_path);
    write_summary_csv(summary, file);
  }
  out << "replications: " << records.size() << '\n';
  write_method_table(summary.methods, out);
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Robust functional regression with extended t-processes", "etpr"};
  app.require_subcommand(1, 1);
  RunConfig c;
  int case_id = 1;
  std::size_t m = 2;
  std::size_t reps = 100;
  std::size_t n_train = 10;
  std::string outlier = "default";
  std::string scope = "curve";

  auto* fit = app.add_subcommand("fit", "Fit a model to curves in a CSV file");
  fit->add_option("--data", c.data_path, "Curves CSV (curve_id,t,x1..xp,y)")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", c.model, "gpr | etpr | betpr");
  fit->add_flag("--select", c.select, "Spike-and-slab selection of kernel parameters (betpr)");
  fit->add_option("--priors", c.priors_path, "Prior hyperparameters (JSON)")->check(CLI::ExistingFile);
  fit->add_option("--init", c.init_path, "Start from a previously written model JSON")->check(CLI::ExistingFile);
  fit->add_option("--out", c.out_path, "Model JSON output (stdout if omitted)");

  auto* predict = app.add_subcommand("predict", "Posterior predictive at query points");
  predict->add_option("--data", c.data_path, "Training curves CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--fit", c.fit_path, "Model JSON written by fit")->required()->check(CLI::ExistingFile);
  predict->add_option("--query", c.query_path, "Query CSV (curve_id,x1..xp)")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", c.out_path, "Predictions CSV (stdout if omitted)");

  auto* simulate = app.add_subcommand("simulate", "Run a replicated simulation study");
  simulate->add_option("--case", case_id, "Scenario 1..6");
  simulate->add_option("--m", m, "Curves per replication");
  simulate->add_option("--reps", reps, "Replications");
  simulate->add_option("--n-train", n_train, "Training points per curve");
  simulate->add_option("--outlier", outlier, "yes | no | default")
      ->check(CLI::IsMember({"yes", "no", "default"}));
  simulate->add_option("--outlier-scope", scope, "curve | single")->check(CLI::IsMember({"curve", "single"}));
  simulate->add_option("--methods", c.methods, "Subset of GPR,ETPR,BETPR,BETPR_VS")->delimiter(',');
  simulate->add_option("--priors", c.priors_path, "Prior hyperparameters (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--out", c.out_path, "Summary CSV");
  simulate->add_option("--records", c.records_path, "Per-replication CSV");

  auto* report = app.add_subcommand("report", "Summarize a per-replication CSV");
  report->add_option("--data", c.data_path, "Records CSV written by simulate --records")->required();
  report->add_option("--out", c.out_path, "Summary CSV");

  for (auto* sub : {fit, simulate}) {
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!c.priors_path.empty()) c.priors = load_priors(c.priors_path);
    if (*fit) {
      c.command = Command::kFit;
      parse_method(c.model);
      return cmd_fit(c, out);
    }
    if (*predict) {
      c.command = Command::kPredict;
      return cmd_predict(c, out);
    }
    if (*simulate) {
      c.command = Command::kSimulate;
      if (case_id < 1 || case_id > 6) throw ConfigInvalid("--case must be in 1..6");
      c.sim = SimConfig::for_case(case_id);
      c.sim.m = m;
      c.sim.reps = reps;
      c.sim.n_train = n_train;
      c.sim.seed = c.seed;
      c.sim.threads = c.threads;
      c.sim.priors = c.priors;
      if (outlier != "default") c.sim.inject_outlier = outlier == "yes";
      c.sim.outlier_scope = scope == "single" ? OutlierScope::kSingleCurve : OutlierScope::kPerCurve;
      return cmd_simulate(c, out);
    }
    c.command = Command::kReport;
    return cmd_report(c, out);
  } catch (const ConfigInvalid& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace etpr::cli
