#include <fstream>
#include <map>
#include <sstream>

#include "etpr/errors.hpp"
#include "etpr/io.hpp"
#include "etpr/simulate.hpp"

namespace etpr {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double to_double(const std::string& cell, std::size_t line_no, const std::string& column) {
  if (cell.empty()) throw ParseError(line_no, "missing value for " + column);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ParseError(line_no, "bad number '" + cell + "' for " + column);
  }
  if (used != cell.size()) throw ParseError(line_no, "bad number '" + cell + "' for " + column);
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  return in;
}

// Checks "x1..xp" starting at `first` and returns p.
std::size_t covariate_count(const std::vector<std::string>& header, std::size_t first,
                            std::size_t trailing) {
  if (header.size() < first + trailing + 1) throw ParseError(1, "header has no covariate columns");
  const std::size_t p = header.size() - first - trailing;
  for (std::size_t q = 0; q < p; ++q) {
    if (header[first + q] != "x" + std::to_string(q + 1)) {
      throw ParseError(1, "expected column x" + std::to_string(q + 1) + ", found '" +
                              header[first + q] + "'");
    }
  }
  return p;
}

}  // namespace

std::vector<CurveData> parse_curves(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError(1, "missing header");
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "curve_id" || header[1] != "t" || header.back() != "y") {
    throw ParseError(1, "header must be curve_id,t,x1,...,xp,y");
  }
  const std::size_t p = covariate_count(header, 2, 1);

  struct Rows {
    std::vector<double> t, y;
    std::vector<std::vector<double>> x;
  };
  std::vector<std::string> order;
  std::map<std::string, Rows> rows;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(cells.size()));
    }
    if (cells[0].empty()) throw ParseError(line_no, "missing curve_id");
    auto [it, inserted] = rows.try_emplace(cells[0]);
    if (inserted) order.push_back(cells[0]);
    Rows& r = it->second;
    r.t.push_back(to_double(cells[1], line_no, "t"));
    std::vector<double> x(p);
    for (std::size_t q = 0; q < p; ++q) x[q] = to_double(cells[2 + q], line_no, header[2 + q]);
    r.x.push_back(std::move(x));
    r.y.push_back(to_double(cells.back(), line_no, "y"));
  }

  std::vector<CurveData> out;
  for (const auto& id : order) {
    const Rows& r = rows.at(id);
    const auto n = static_cast<Eigen::Index>(r.y.size());
    CurveData c;
    c.id = id;
    c.t = Eigen::Map<const Vector>(r.t.data(), n);
    c.y = Eigen::Map<const Vector>(r.y.data(), n);
    c.x.resize(n, static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < p; ++q) c.x(j, static_cast<Eigen::Index>(q)) = r.x[static_cast<std::size_t>(j)][q];
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CurveData> parse_curves(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_curves(in);
}

void write_curves(const std::vector<CurveData>& curves, std::ostream& out) {
  if (curves.empty()) throw InconsistentDimensions("no curves to write");
  const Eigen::Index p = curves.front().p();
  out << "curve_id,t";
  for (Eigen::Index q = 0; q < p; ++q) out << ",x" << q + 1;
  out << ",y\n";
  for (const auto& c : curves) {
    if (c.p() != p) throw InconsistentDimensions("curves disagree on p");
    c.validate();
    for (Eigen::Index j = 0; j < c.n(); ++j) {
      out << c.id << ',' << format_double(c.t.size() ? c.t[j] : static_cast<double>(j));
      for (Eigen::Index q = 0; q < p; ++q) out << ',' << format_double(c.x(j, q));
      out << ',' << format_double(c.y[j]) << '\n';
    }
  }
}

void write_curves(const std::vector<CurveData>& curves, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_curves(curves, out);
}

std::vector<QueryRow> parse_queries(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) return {};
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "curve_id") {
    throw ParseError(1, "header must be curve_id,x1,...,xp");
  }
  const std::size_t p = covariate_count(header, 1, 0);
  std::vector<QueryRow> out;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ParseError(line_no, "wrong number of fields");
    QueryRow row{cells[0], Vector(static_cast<Eigen::Index>(p))};
    if (row.curve_id.empty()) throw ParseError(line_no, "missing curve_id");
    for (std::size_t q = 0; q < p; ++q) {
      row.x[static_cast<Eigen::Index>(q)] = to_double(cells[1 + q], line_no, header[1 + q]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<QueryRow> parse_queries(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_queries(in);
}

}  // namespace etpr
