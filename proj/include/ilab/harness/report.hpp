#pragma once

// Experiment reports: fixed-column rows of measured numbers, gate
// parameters, and the PASS/FAIL checks derived from them. Reports round-trip
// through CSV exactly (values are written with 17 significant digits), so a
// saved report can be re-gated offline.

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ilab/core.hpp"

namespace ilab::harness {

inline constexpr std::string_view kCsvVersion = "v1";

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;

  friend bool operator==(const Check&, const Check&) = default;
};

struct Row {
  std::string label;
  std::vector<double> values;

  friend bool operator==(const Row&, const Row&) = default;
};

struct Report {
  std::string experiment;
  std::map<std::string, double> params;  // everything the gate reads besides rows
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::vector<Check> checks;
  std::vector<std::string> notes;  // free text, not used by gates

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InputError("Report(" + experiment + "): no column " + name);
  }
  double at(const Row& r, const std::string& name) const { return r.values.at(column(name)); }
  double param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw InputError("Report(" + experiment + "): no parameter " + name);
    return it->second;
  }

  Row& add(std::string label, std::vector<double> values) {
    if (values.size() != columns.size()) throw InputError("Report(" + experiment + "): row width mismatch");
    for (char& c : label)
      if (c == ',' || c == '\n') c = ';';
    rows.push_back({std::move(label), std::move(values)});
    return rows.back();
  }

  /// Rows whose label starts with `prefix`.
  std::vector<const Row*> select(const std::string& prefix) const {
    std::vector<const Row*> out;
    for (const auto& r : rows)
      if (r.label.rfind(prefix, 0) == 0) out.push_back(&r);
    return out;
  }
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// Header comment, parameter comments, column line, then one line per row.
inline void write_report_csv(const Report& r, std::ostream& os) {
  os << "# isaacs-lab csv " << kCsvVersion << " experiment=" << r.experiment << "\n";
  for (const auto& [k, v] : r.params) os << "# param " << k << "=" << fmt(v) << "\n";
  os << "label";
  for (const auto& c : r.columns) os << "," << c;
  os << "\n";
  for (const auto& row : r.rows) {
    os << row.label;
    for (double v : row.values) os << "," << fmt(v);
    os << "\n";
  }
}

inline Report read_report_csv(std::istream& is) {
  Report r;
  std::string line;
  if (!std::getline(is, line)) throw InputError("read_report_csv: empty input");
  const std::string head = "# isaacs-lab csv " + std::string(kCsvVersion) + " experiment=";
  if (line.rfind(head, 0) != 0) throw InputError("read_report_csv: unrecognized header: " + line);
  r.experiment = line.substr(head.size());
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  bool have_columns = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("# param ", 0) == 0) {
      const auto body = line.substr(8);
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw InputError("read_report_csv: bad parameter line: " + line);
      r.params[body.substr(0, eq)] = std::stod(body.substr(eq + 1));
      continue;
    }
    if (line[0] == '#') continue;
    auto cells = split(line);
    if (!have_columns) {
      if (cells.empty() || cells[0] != "label") throw InputError("read_report_csv: missing column line");
      r.columns.assign(cells.begin() + 1, cells.end());
      have_columns = true;
      continue;
    }
    if (cells.size() != r.columns.size() + 1) throw InputError("read_report_csv: ragged row: " + line);
    Row row;
    row.label = cells[0];
    for (std::size_t i = 1; i < cells.size(); ++i) row.values.push_back(std::stod(cells[i]));
    r.rows.push_back(std::move(row));
  }
  return r;
}

/// Least-squares line through (log x, log y).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual in log space
  std::size_t points = 0;
};

inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("fit_loglog: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) lx.push_back(std::log(x[i])), ly.push_back(std::log(y[i]));
  LogLogFit f;
  f.points = lx.size();
  if (lx.size() < 2) return f;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
  if (sxx == 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

/// max/min of positive numbers; 1 when all are zero, infinite when zeros mix in.
inline double ratio_spread(const std::vector<double>& xs) {
  double lo = INFINITY, hi = 0.0;
  for (double x : xs) lo = std::min(lo, x), hi = std::max(hi, x);
  if (xs.empty() || hi == 0.0) return 1.0;
  return lo > 0 ? hi / lo : INFINITY;
}

/// Fixed-width summary table for standard output.
inline void print_summary(const Report& r, std::ostream& os) {
  os << "== " << r.experiment << " (" << r.rows.size() << " rows)\n";
  for (const auto& c : r.checks) os << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  " << c.detail << "\n";
  for (const auto& n : r.notes) os << "  note: " << n << "\n";
}

}  // namespace ilab::harness
