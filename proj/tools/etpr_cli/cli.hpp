#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etpr/emtd.hpp"
#include "etpr/simulate.hpp"

namespace etpr::cli {

enum class Command { kFit, kPredict, kSimulate, kReport };

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  Command command = Command::kFit;
  std::string data_path;
  std::string query_path;
  std::string fit_path;
  std::string init_path;
  std::string out_path;
  std::string records_path;
  std::string model = "betpr";
  bool select = false;
  std::string priors_path;
  PriorConfig priors;
  SimConfig sim;
  std::vector<std::string> methods;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

int cmd_fit(const RunConfig& config, std::ostream& out);
int cmd_predict(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_report(const RunConfig& config, std::ostream& out);

/// Parses `args` (without the program name), dispatches, and maps errors to
/// exit codes. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace etpr::cli
