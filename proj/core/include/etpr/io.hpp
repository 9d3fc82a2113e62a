#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "etpr/estimate.hpp"

namespace etpr {

/// Reads `curve_id,t,x1,...,xp,y` (header required, LF or CRLF). Rows are
/// grouped by curve_id in order of first appearance. Throws ParseError.
std::vector<CurveData> parse_curves(std::istream& in);
std::vector<CurveData> parse_curves(const std::string& path);

void write_curves(const std::vector<CurveData>& curves, std::ostream& out);
void write_curves(const std::vector<CurveData>& curves, const std::string& path);

/// Query points `curve_id,x1,...,xp`.
struct QueryRow {
  std::string curve_id;
  Vector x;
};
std::vector<QueryRow> parse_queries(std::istream& in);
std::vector<QueryRow> parse_queries(const std::string& path);

/// A fitted model as stored on disk. `curve_ids[i]` names `fit.model.kernels[i]`.
struct StoredFit {
  FitResult fit;
  std::vector<std::string> curve_ids;
};

std::string model_to_json(const FitResult& fit, const std::vector<std::string>& curve_ids);
StoredFit model_from_json(const std::string& text);
StoredFit load_model(const std::string& path);

std::string priors_to_json(const PriorConfig& priors);
/// Missing fields keep their defaults.
PriorConfig priors_from_json(const std::string& text);
PriorConfig load_priors(const std::string& path);

}  // namespace etpr
