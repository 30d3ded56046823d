#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "layerfem/assembly.hpp"
#include "layerfem/linalg.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/norms.hpp"
#include "layerfem/problems.hpp"

namespace layerfem {

/// delta_s = 1/N, delta_y = N^{-3/2}, delta_x = delta_xy = 0.
inline StabilizationConfig standard_delta_rule(int N) {
  if (N < 6) throw InvalidArgument("standard_delta_rule: N must be >= 6");
  const double n = static_cast<double>(N);
  return {1.0 / n, 0.0, std::pow(n, -1.5), 0.0};
}

/// Standard rule with optional per-region overrides.
struct DeltaRule {
  std::optional<double> s, x, y, xy;

  StabilizationConfig operator()(int N) const {
    StabilizationConfig c = standard_delta_rule(N);
    if (s) c.delta_s = *s;
    if (x) c.delta_x = *x;
    if (y) c.delta_y = *y;
    if (xy) c.delta_xy = *xy;
    return c;
  }

  bool is_standard() const { return !s && !x && !y && !xy; }

  std::string describe() const {
    auto part = [](const char* name, const std::optional<double>& v, const char* def) {
      return std::string(name) + "=" + (v ? std::to_string(*v) : std::string(def));
    };
    return part("delta_s", s, "1/N") + ", " + part("delta_x", x, "0") + ", " + part("delta_y", y, "N^-3/2") + ", " +
           part("delta_xy", xy, "0");
  }
};

struct SolverSettings {
  GmresOptions gmres{};
  PreconditionerKind preconditioner = PreconditionerKind::ILU0;
  int assembly_jobs = 1;
};

/// One benchmark solve with everything needed to measure u^I - u^N.
struct BenchmarkRun {
  ShishkinMesh mesh;
  BenchmarkProblem benchmark;
  StabilizationConfig config;
  DiscreteSystem system;
  std::vector<double> solution;  ///< over interior DOFs
  SolveStats stats;

  FEFunction discrete() const { return FEFunction::from_dofs(mesh, system.dofs, solution); }
  FEFunction interpolant() const { return interpolate(mesh, benchmark.exact); }
};

inline BenchmarkRun solve_benchmark(const MeshParams& params, Layout layout, const StabilizationConfig& config,
                                    double mu0 = 2.0, const SolverSettings& settings = {}) {
  BenchmarkRun run{build_mesh(params, layout), benchmark_problem(params.eps, mu0, params.beta), config, {}, {}, {}};
  run.benchmark.problem.validate();
  AssemblyOptions opts;
  opts.jobs = settings.assembly_jobs;
  run.system = assemble(run.mesh, run.benchmark.problem, config, opts);
  run.solution.assign(run.system.dofs.size(), 0.0);
  const Preconditioner M = build_preconditioner(run.system.matrix, settings.preconditioner);
  run.stats = gmres(run.system.matrix, run.system.rhs, run.solution, M, settings.gmres);
  return run;
}

struct ErrorRecord {
  Layout layout = Layout::Triangular;
  int N = 0;
  double eps = 0.0;
  double mu0 = 2.0;
  double e_eps = 0.0;  ///< ||u^I - u^N||_eps
  double e_sd = 0.0;   ///< ||u^I - u^N||_SD
  NormParts parts;     ///< squared pieces, for re-weighting with another mu0
  SolveStats stats;

  /// The same record measured with a different mu0 (the discrete solution does not depend on it).
  ErrorRecord with_mu0(double mu) const {
    ErrorRecord r = *this;
    r.mu0 = mu;
    r.e_eps = std::sqrt(parts.energy_sq(eps, mu));
    r.e_sd = std::sqrt(parts.sd_sq(eps, mu));
    return r;
  }
};

inline ErrorRecord measure(const BenchmarkRun& run, Layout layout) {
  const FEFunction d = run.interpolant() - run.discrete();
  ErrorRecord rec;
  rec.layout = layout;
  rec.N = run.mesh.N();
  rec.eps = run.mesh.params.eps;
  rec.parts = norm_parts(d, &run.benchmark.problem, run.config);
  rec.stats = run.stats;
  return rec.with_mu0(run.benchmark.problem.mu0);
}

/// ||u^I - u^N|| in the eps and SD norms for one (N, eps, layout).
inline ErrorRecord supercloseness_error(int N, double eps, Layout layout, const DeltaRule& rule = {}, double mu0 = 2.0,
                                        const SolverSettings& settings = {}, double beta = 1.0, double rho = 2.5) {
  const MeshParams params{N, eps, beta, rho};
  const BenchmarkRun run = solve_benchmark(params, layout, rule(N), mu0, settings);
  return measure(run, layout);
}

/// (ln e_N - ln e_2N) / ln 2
inline double convergence_rate(double e_N, double e_2N) { return (std::log(e_N) - std::log(e_2N)) / std::log(2.0); }

/// Least-squares slope of -ln(e) against ln(h).
inline double fitted_order(std::span<const double> h, std::span<const double> e) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(h[i]), my += std::log(e[i]);
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(e[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct TableRow {
  int N = 0;
  double e_eps = 0.0;
  double e_sd = 0.0;
  std::optional<double> rate_eps;
  std::optional<double> rate_sd;
  bool complete = true;  ///< every eps in the sweep converged
};

struct ConvergenceTable {
  Layout layout = Layout::Triangular;
  std::string delta_description;
  double mu0 = 2.0;
  std::vector<TableRow> rows;
  std::vector<ErrorRecord> records;  ///< per (N, eps), N-major in input order

  bool complete() const {
    return std::all_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.complete; });
  }
};

struct StudyOptions {
  std::vector<int> N_list{12, 24, 48, 96, 192};
  std::vector<double> eps_list{1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16};
  Layout layout = Layout::Triangular;
  DeltaRule delta_rule{};
  double mu0 = 2.0;
  double beta = 1.0;
  double rho = 2.5;
  SolverSettings solver{};
  int jobs = 1;  ///< concurrent (N, eps) runs
};

/// Rebuilds the per-N rows (max over eps, then rates) from records.
inline std::vector<TableRow> tabulate(const std::vector<int>& N_list, const std::vector<ErrorRecord>& records) {
  std::vector<TableRow> rows;
  for (int N : N_list) {
    TableRow row;
    row.N = N;
    for (const ErrorRecord& r : records) {
      if (r.N != N) continue;
      if (!r.stats.converged) {
        row.complete = false;
        continue;
      }
      row.e_eps = std::max(row.e_eps, r.e_eps);
      row.e_sd = std::max(row.e_sd, r.e_sd);
    }
    rows.push_back(row);
  }
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k + 1].N != 2 * rows[k].N || !rows[k].complete || !rows[k + 1].complete) continue;
    rows[k].rate_eps = convergence_rate(rows[k].e_eps, rows[k + 1].e_eps);
    rows[k].rate_sd = convergence_rate(rows[k].e_sd, rows[k + 1].e_sd);
  }
  return rows;
}

/// Runs every (N, eps) pair (optionally concurrently) and reduces to a table.
/// The output does not depend on `jobs` or completion order.
inline ConvergenceTable run_study(const StudyOptions& opt) {
  if (opt.N_list.empty() || opt.eps_list.empty()) throw InvalidArgument("run_study: empty N or eps list");
  for (int N : opt.N_list) MeshParams{N, opt.eps_list.front(), opt.beta, opt.rho}.validate();

  struct Task {
    int N;
    double eps;
  };
  std::vector<Task> tasks;
  for (int N : opt.N_list)
    for (double eps : opt.eps_list) tasks.push_back({N, eps});

  std::vector<ErrorRecord> records(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        records[t] = supercloseness_error(tasks[t].N, tasks[t].eps, opt.layout, opt.delta_rule, opt.mu0, opt.solver,
                                          opt.beta, opt.rho);
      } catch (const NumericalError&) {
        records[t].layout = opt.layout;
        records[t].N = tasks[t].N;
        records[t].eps = tasks[t].eps;
        records[t].mu0 = opt.mu0;
        records[t].e_eps = records[t].e_sd = std::numeric_limits<double>::quiet_NaN();
        records[t].stats.converged = false;
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const int jobs = std::clamp(opt.jobs, 1, static_cast<int>(tasks.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ConvergenceTable table;
  table.layout = opt.layout;
  table.delta_description = opt.delta_rule.describe();
  table.mu0 = opt.mu0;
  table.records = std::move(records);
  table.rows = tabulate(opt.N_list, table.records);
  return table;
}

/// The same study re-weighted with another mu0.
inline ConvergenceTable with_mu0(const ConvergenceTable& table, double mu0) {
  ConvergenceTable out = table;
  out.mu0 = mu0;
  for (ErrorRecord& r : out.records)
    if (r.stats.converged) r = r.with_mu0(mu0);
  std::vector<int> Ns;
  for (const TableRow& row : table.rows) Ns.push_back(row.N);
  out.rows = tabulate(Ns, out.records);
  return out;
}

struct CoercivityReport {
  int trials = 0;
  int violations = 0;
  double min_ratio = std::numeric_limits<double>::infinity();  ///< min of v'Av / ||v||_SD^2
  bool passed() const { return violations == 0; }
};

/// Checks v'Av >= 1/2 ||v||_SD^2 for random interior coefficient vectors.
inline CoercivityReport coercivity_check(const ShishkinMesh& mesh, const Problem& problem,
                                         const StabilizationConfig& config, int trials, unsigned seed = 42) {
  const DiscreteSystem sys = assemble(mesh, problem, config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  CoercivityReport report;
  report.trials = trials;
  std::vector<double> v(sys.dofs.size());
  for (int t = 0; t < trials; ++t) {
    for (double& x : v) x = unit(rng);
    const double lhs = quadratic_form(sys.matrix, v);
    const double sd = sd_norm_sq(FEFunction::from_dofs(mesh, sys.dofs, v), problem, config);
    const double ratio = sd > 0.0 ? lhs / sd : 1.0;
    report.min_ratio = std::min(report.min_ratio, ratio);
    if (lhs < 0.5 * sd - 1e-12 * std::abs(sd)) report.violations++;
  }
  return report;
}

/// Log-log plot data: (N, e_sd) with the comparator N^{-3/2} ln^{3/4} N,
/// also scaled to coincide with the first error.
struct PlotPoint {
  int N = 0;
  double e_sd = 0.0;
  double comparator = 0.0;
  double comparator_scaled = 0.0;
};

inline std::vector<PlotPoint> plot_data(const ConvergenceTable& table) {
  std::vector<PlotPoint> pts;
  for (const TableRow& row : table.rows) {
    const double n = row.N;
    pts.push_back({row.N, row.e_sd, std::pow(n, -1.5) * std::pow(std::log(n), 0.75), 0.0});
  }
  if (!pts.empty() && pts.front().comparator > 0.0) {
    const double scale = pts.front().e_sd / pts.front().comparator;
    for (PlotPoint& p : pts) p.comparator_scaled = scale * p.comparator;
  }
  return pts;
}

}  // namespace layerfem
