#include "tolreg/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace tolreg {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // snprintf honors the C locale here; no separator fixup needed, but keep the
  // output canonical if a host ever injects one.
  for (char& c : buf) {
    if (c == '\0') break;
    if (c == ',') c = '.';
  }
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_signal_csv(const std::filesystem::path& path, const Signal<double>& s) {
  std::string out = "x,value\n";
  for (Index i = 0; i < s.grid.n; ++i)
    out += g17(s.grid.nodes[i]) + "," + g17(s.values[i]) + "\n";
  write_text(path, out);
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::size_t columns,
                                                  const std::string& header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw std::runtime_error("unexpected CSV header in " + path.string() +
                             ": got '" + line + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string field =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw std::runtime_error("bad numeric field '" + field + "' in " +
                                 path.string());
      row.push_back(value);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row.size() != columns)
      throw std::runtime_error("wrong column count in " + path.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Signal<double> read_signal_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_csv(path, 2, "x,value");
  const Index n = Index(rows.size());
  if (n < 2)
    throw std::runtime_error("signal CSV needs at least 2 rows to infer spacing: " +
                             path.string());
  const double h = rows[1][0] - rows[0][0];
  if (!(h > 0))
    throw std::runtime_error("signal CSV x column must be increasing: " + path.string());
  for (Index i = 1; i < n; ++i) {
    const double dx = rows[i][0] - rows[i - 1][0];
    if (std::abs(dx - h) > 1e-9 * std::abs(h))
      throw std::runtime_error("signal CSV spacing is not uniform to 1e-9: " +
                               path.string());
  }
  Grid<double> grid = make_grid<double>(n, rows[0][0] - h / 2, rows[n - 1][0] + h / 2);
  Vector<double> values(n);
  for (Index i = 0; i < n; ++i) values[i] = rows[i][1];
  return make_signal(std::move(grid), std::move(values));
}

void write_history_csv(const std::filesystem::path& path,
                       const SolveResult<double>& result) {
  std::string out = "iter,objective,residual,penalty\n";
  for (std::size_t k = 0; k < result.objective_history.size(); ++k)
    out += std::to_string(k) + "," + g17(result.objective_history[k]) + "," +
           g17(result.residual_history[k]) + "," + g17(result.penalty_history[k]) +
           "\n";
  write_text(path, out);
}

void write_lcurve_csv(const std::filesystem::path& path,
                      const LCurveResult<double>& result) {
  std::string out = "alpha,residual,penalty\n";
  for (const auto& p : result.points)
    out += g17(p.alpha) + "," + g17(p.residual_norm) + "," + g17(p.penalty_norm) +
           "\n";
  write_text(path, out);
}

void write_morozov_csv(const std::filesystem::path& path,
                       const DiscrepancyReport<double>& report) {
  std::string out = "alpha,G,threshold,feasible\n";
  for (Index i = 0; i < report.alpha_grid.values.size(); ++i) {
    const bool feasible = report.g_values[i] <= report.threshold;
    out += g17(report.alpha_grid.values[i]) + "," + g17(report.g_values[i]) + "," +
           g17(report.threshold) + "," + (feasible ? "1" : "0") + "\n";
  }
  write_text(path, out);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  return nlohmann::json::parse(read_text(path));
}

}  // namespace tolreg
