#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "etpr/estimate.hpp"

namespace etpr {

/// Where the extra heavy-tailed error goes: one training point on every
/// curve, or a single training point on one randomly chosen curve.
enum class OutlierScope { kPerCurve, kSingleCurve };

struct SimConfig {
  int case_id = 1;
  std::size_t m = 2;
  std::size_t n_train = 10;
  std::size_t n_total = 50;
  std::size_t p = 1;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  bool inject_outlier = true;
  OutlierScope outlier_scope = OutlierScope::kPerCurve;
  KernelParams beta0;
  double sigma0_sq = 0.05;
  unsigned threads = 1;
  PriorConfig priors;
  FitOptions fit;

  /// Defaults for one of the six scenarios: p, ground-truth kernel and
  /// whether an outlier is injected (cases 1, 3 and 4).
  static SimConfig for_case(int case_id);

  /// Throws ConfigInvalid.
  void validate() const;
};

struct SimCurve {
  CurveData data;     ///< all n_total points
  Vector f;           ///< noise-free signal at every point
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct Dataset {
  std::vector<SimCurve> curves;
  KernelParams truth;
  double sigma0_sq = 0.0;
  /// (curve, point index) pairs that received an extra error.
  std::vector<std::pair<std::size_t, std::size_t>> outlier_positions;

  std::vector<CurveData> training() const;
  std::vector<CurveData> testing() const;
};

Dataset gen_case(const SimConfig& config, Rng& rng);

/// Random choices used by outlier injection; replaceable in tests.
struct OutlierDraws {
  std::function<std::size_t(std::size_t count)> pick;  ///< uniform in [0, count)
  std::function<double()> heavy_tail;                  ///< one Student-t(2) draw

  static OutlierDraws from(Rng& rng);
};

Dataset inject_outlier(Dataset dataset, OutlierScope scope, OutlierDraws draws);
Dataset inject_outlier(Dataset dataset, OutlierScope scope, Rng& rng);

enum class StudyMethod { kGpr, kEtpr, kBetpr, kBetprVs };

std::string to_string(StudyMethod method);
StudyMethod parse_study_method(const std::string& name);

struct MethodRecord {
  StudyMethod method = StudyMethod::kGpr;
  bool failed = false;
  double mse = 0.0;
  double nu_hat = 0.0;  ///< NaN for GPR
  double acc_w = 0.0;   ///< NaN unless selection accuracy applies
  double acc_a = 0.0;
  /// |log estimate - log truth| for every kernel component with nonzero
  /// truth. In memory only.
  std::vector<double> log_errors;
};

struct ReplicationRecord {
  std::size_t rep = 0;
  std::vector<MethodRecord> methods;
};

/// Maps (curve index, query rows) to predicted means.
using Predictor = std::function<Vector(std::size_t curve, const Matrix& u)>;

/// Mean over every test point of every curve of (y - prediction)^2.
double test_mse(const Dataset& dataset, const Predictor& predictor);

/// Fraction of indicators matching the truth mask, separately for the
/// squared-exponential (w) and linear (a) blocks.
std::pair<double, double> selection_accuracy(const KernelParams& truth,
                                             const std::vector<CurveMask>& masks);

/// Generates one dataset and fits every requested method to the same
/// training data. A failing method is recorded, not thrown.
ReplicationRecord run_replication(const SimConfig& config, const std::set<StudyMethod>& methods,
                                  Rng& rng, std::size_t rep_index = 0);

struct MethodSummary {
  StudyMethod method = StudyMethod::kGpr;
  std::size_t ok = 0;
  std::size_t failures = 0;
  double mse_mean = 0.0;
  double mse_sd = 0.0;
  double nu_mean = 0.0;
  double nu_sd = 0.0;
  double acc_w_mean = 0.0;
  double acc_a_mean = 0.0;
  /// Fewer than two successful replications; sd fields are 0.
  bool degenerate = false;
};

struct StudySummary {
  SimConfig config;
  std::vector<MethodSummary> methods;
  std::vector<ReplicationRecord> records;

  const MethodSummary& at(StudyMethod method) const;
};

/// Aggregates replication records (sample sd with n - 1 denominator).
std::vector<MethodSummary> summarize(const std::vector<ReplicationRecord>& records);

/// Runs `config.reps` replications with per-replication seeds derived from
/// `config.seed`. Throws StudyFailed when more than 20% of replications fail
/// for any method.
StudySummary run_study(const SimConfig& config, const std::set<StudyMethod>& methods);

void write_summary_csv(const StudySummary& summary, std::ostream& out);
void write_summary_text(const StudySummary& summary, std::ostream& out);
/// Human-aligned table of method summaries (no configuration header).
void write_method_table(const std::vector<MethodSummary>& methods, std::ostream& out);
void write_records_csv(const std::vector<ReplicationRecord>& records, std::ostream& out);
std::vector<ReplicationRecord> read_records_csv(std::istream& in);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace etpr
