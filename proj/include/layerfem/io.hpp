#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "layerfem/analysis.hpp"
#include "layerfem/mesh.hpp"

namespace layerfem {

/// Shortest round-trip decimal, independent of the C/C++ locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  return v;
}

inline int parse_int(std::string_view s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidArgument("not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

/// "%.3e"-style scientific notation with `digits` significant figures.
inline std::string format_sci(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return buf;
}

inline std::string format_fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// ---------------------------------------------------------------- mesh JSON

inline nlohmann::json mesh_to_json(const ShishkinMesh& mesh) {
  using nlohmann::json;
  json nodes = json::array();
  for (const Point& p : mesh.nodes) nodes.push_back({p.x.value, p.y.value});
  json cells = json::array();
  for (const Cell& c : mesh.cells) {
    json v = json::array();
    for (int k = 0; k < c.vertex_count(); ++k) v.push_back(c.vertex_ids[k]);
    cells.push_back({{"kind", to_string(c.kind)}, {"v", v}, {"region", to_string(c.region)}});
  }
  json meta = {{"N", mesh.params.N},
               {"eps", mesh.params.eps},
               {"beta", mesh.params.beta},
               {"rho", mesh.params.rho},
               {"lambda_x", mesh.transition.lambda_x},
               {"lambda_y", mesh.transition.lambda_y},
               {"layout", to_string(mesh.layout)}};
  return {{"nodes", nodes}, {"cells", cells}, {"boundary", mesh.boundary_node_ids}, {"meta", meta}};
}

inline nlohmann::json report_to_json(const ValidationReport& r) {
  nlohmann::json regions;
  for (RegionTag t : kAllRegions)
    regions[std::string(to_string(t))] = {{"cells", r.region_cell_counts[region_index(t)]},
                                          {"area", r.region_areas[region_index(t)]}};
  return {{"ok", r.ok},
          {"failures", r.failures},
          {"total_area", r.total_area},
          {"quads", r.quad_count},
          {"triangles", r.triangle_count},
          {"regions", regions},
          {"eps_assumption_violated", r.eps_assumption_violated},
          {"capped_x", r.capped_x},
          {"capped_y", r.capped_y}};
}

// ---------------------------------------------------------------- records CSV

inline constexpr std::string_view kRecordsHeader = "layout,N,eps,e_eps,e_sd,iters,converged";
inline constexpr std::string_view kTableHeader = "layout,N,e_eps,rate_eps,e_sd,rate_sd";

inline std::string record_csv_row(const ErrorRecord& r) {
  std::string row;
  row += to_string(r.layout);
  row += ',' + std::to_string(r.N);
  row += ',' + format_double(r.eps);
  row += ',' + format_double(r.e_eps);
  row += ',' + format_double(r.e_sd);
  row += ',' + std::to_string(r.stats.iterations);
  row += r.stats.converged ? ",true" : ",false";
  return row;
}

inline void write_records_csv(std::ostream& os, const std::vector<ErrorRecord>& records, bool header = true) {
  if (header) os << kRecordsHeader << '\n';
  for (const ErrorRecord& r : records) os << record_csv_row(r) << '\n';
}

inline std::vector<ErrorRecord> read_records_csv(std::istream& is) {
  std::vector<ErrorRecord> out;
  std::string line;
  if (!std::getline(is, line) || line != kRecordsHeader) throw InvalidArgument("records CSV: bad or missing header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw InvalidArgument("records CSV: expected 7 fields in '" + line + "'");
    ErrorRecord r;
    r.layout = parse_layout(f[0]);
    r.N = parse_int(f[1]);
    r.eps = parse_double(f[2]);
    r.e_eps = parse_double(f[3]);
    r.e_sd = parse_double(f[4]);
    r.stats.iterations = parse_int(f[5]);
    if (f[6] != "true" && f[6] != "false") throw InvalidArgument("records CSV: converged must be true|false");
    r.stats.converged = f[6] == "true";
    out.push_back(r);
  }
  return out;
}

inline void write_table_csv(std::ostream& os, const ConvergenceTable& t) {
  os << kTableHeader << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const TableRow& row : t.rows)
    os << to_string(t.layout) << ',' << row.N << ',' << format_double(row.e_eps) << ',' << opt(row.rate_eps) << ','
       << format_double(row.e_sd) << ',' << opt(row.rate_sd) << '\n';
}

/// Five-column table: N, ||u^I-u^N||_eps, rate, ||u^I-u^N||_SD, rate.
inline void write_table_markdown(std::ostream& os, const ConvergenceTable& t) {
  os << "Errors and convergence orders, layout " << to_string(t.layout) << " (mu0 = " << format_double(t.mu0) << "; "
     << t.delta_description << ")\n\n";
  os << "| N | \\|\\|u^I-u^N\\|\\|_eps | Rate | \\|\\|u^I-u^N\\|\\|_SD | Rate |\n";
  os << "|---|---|---|---|---|\n";
  auto rate = [](const std::optional<double>& v) { return v ? format_fixed(*v, 2) : std::string("---"); };
  for (const TableRow& row : t.rows) {
    os << "| " << row.N << " | " << format_sci(row.e_eps) << " | " << rate(row.rate_eps) << " | "
       << format_sci(row.e_sd) << " | " << rate(row.rate_sd) << " |";
    if (!row.complete) os << " (incomplete)";
    os << '\n';
  }
}

inline void write_plot_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "N,e_sd,comparator,comparator_scaled\n";
  for (const PlotPoint& p : plot_data(t))
    os << p.N << ',' << format_double(p.e_sd) << ',' << format_double(p.comparator) << ','
       << format_double(p.comparator_scaled) << '\n';
}

inline nlohmann::json record_to_json(const ErrorRecord& r) {
  return {{"layout", to_string(r.layout)},
          {"N", r.N},
          {"eps", r.eps},
          {"mu0", r.mu0},
          {"e_eps", r.e_eps},
          {"e_sd", r.e_sd},
          {"iters", r.stats.iterations},
          {"restarts", r.stats.restarts},
          {"relative_residual", r.stats.relative_residual},
          {"converged", r.stats.converged}};
}

inline nlohmann::json table_to_json(const ConvergenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const TableRow& row : t.rows) {
    nlohmann::json j = {{"N", row.N}, {"e_eps", row.e_eps}, {"e_sd", row.e_sd}, {"complete", row.complete}};
    j["rate_eps"] = row.rate_eps ? nlohmann::json(*row.rate_eps) : nlohmann::json(nullptr);
    j["rate_sd"] = row.rate_sd ? nlohmann::json(*row.rate_sd) : nlohmann::json(nullptr);
    rows.push_back(j);
  }
  nlohmann::json records = nlohmann::json::array();
  for (const ErrorRecord& r : t.records) records.push_back(record_to_json(r));
  return {{"layout", to_string(t.layout)}, {"mu0", t.mu0}, {"delta", t.delta_description}, {"rows", rows},
          {"records", records}};
}

}  // namespace layerfem
