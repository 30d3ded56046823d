// layerfem: streamline-diffusion FEM on Shishkin meshes from the command line.
//
// Exit codes: 0 success, 1 property/validation failure, 2 usage error,
// 3 solver failure, 4 incomplete study.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "layerfem/analysis.hpp"
#include "layerfem/io.hpp"
#include "layerfem/linalg.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/verification.hpp"

namespace {

using namespace layerfem;

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kUsage = 2, kSolverFailure = 3, kIncompleteStudy = 4 };

struct RunConfig {
  int N = 12;
  std::string N_list = "12,24,48,96,192";
  double eps = 1e-6;
  std::string eps_list = "1e-6,1e-8,1e-10,1e-12,1e-14,1e-16";
  std::string layout = "triangular";
  double mu0 = 2.0;
  double rho = 2.5;
  double beta = 1.0;
  std::optional<double> delta_s, delta_x, delta_y, delta_xy;
  double tol = 1e-12;
  int restart = 60;
  int max_outer = 200;
  std::string precond = "ilu0";
  int jobs = 1;
  bool deterministic = true;
  std::string format = "csv";
  std::string out;
  std::string matrix_out;
  unsigned seed = 42;
  bool inject_delta_violation = false;
};

void add_mesh_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--eps", cfg.eps, "perturbation parameter eps")->check(CLI::PositiveNumber);
  cmd->add_option("--layout", cfg.layout, "triangular|rectangular|hybrid1|hybrid2");
  cmd->add_option("--rho", cfg.rho, "transition constant rho");
  cmd->add_option("--beta", cfg.beta, "lower bound beta of b");
}

void add_solver_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--mu0", cfg.mu0, "mu0 used by the stabilization bound and the eps/SD norms");
  cmd->add_option("--delta-s", cfg.delta_s, "override delta in Omega_s (default 1/N)");
  cmd->add_option("--delta-x", cfg.delta_x, "override delta in Omega_x (default 0)");
  cmd->add_option("--delta-y", cfg.delta_y, "override delta in Omega_y (default N^-3/2)");
  cmd->add_option("--delta-xy", cfg.delta_xy, "override delta in Omega_xy (default 0)");
  cmd->add_option("--tol", cfg.tol, "GMRES relative residual tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--restart", cfg.restart, "GMRES restart length")->check(CLI::PositiveNumber);
  cmd->add_option("--max-outer", cfg.max_outer, "maximum GMRES restart cycles")->check(CLI::PositiveNumber);
  cmd->add_option("--precond", cfg.precond, "none|jacobi|ilu0");
  cmd->add_option("--jobs", cfg.jobs, "worker threads")->envname("LAYERFEM_JOBS")->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic,!--no-deterministic", cfg.deterministic,
                "bitwise-reproducible output (always honoured; parallel work is reduced in index order)");
}

DeltaRule delta_rule(const RunConfig& cfg) { return {cfg.delta_s, cfg.delta_x, cfg.delta_y, cfg.delta_xy}; }

SolverSettings solver_settings(const RunConfig& cfg) {
  SolverSettings s;
  s.gmres = {cfg.restart, cfg.tol, cfg.max_outer};
  s.preconditioner = parse_preconditioner(cfg.precond);
  s.assembly_jobs = cfg.jobs;
  return s;
}

/// Writes to --out when given, stdout otherwise.
void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file " + cfg.out);
  f << text;
}

void check_format(const RunConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "md" && cfg.format != "json")
    throw InvalidArgument("unknown format '" + cfg.format + "' (expected csv|md|json)");
}

int cmd_mesh(const RunConfig& cfg) {
  const MeshParams params{cfg.N, cfg.eps, cfg.beta, cfg.rho};
  params.validate();
  const ShishkinMesh mesh = build_mesh(params, parse_layout(cfg.layout));
  const ValidationReport report = validate_mesh(mesh);
  if (report.eps_assumption_violated)
    std::cerr << "warning: epsilon assumption violated (eps > min{1/N, ln^-6 N})\n";
  if (report.capped_x || report.capped_y)
    std::cerr << "warning: transition parameter capped (lambda_x = 1/2 or lambda_y = 1/4); mesh is piecewise uniform\n";
  const std::string mesh_json = mesh_to_json(mesh).dump() + "\n";
  if (cfg.out.empty()) {
    std::cout << mesh_json;
    std::cerr << report_to_json(report).dump(2) << "\n";
  } else {
    emit(cfg, mesh_json);
    std::cout << report_to_json(report).dump(2) << "\n";
  }
  return report.ok ? kOk : kPropertyFailure;
}

int cmd_solve(const RunConfig& cfg) {
  check_format(cfg);
  const MeshParams params{cfg.N, cfg.eps, cfg.beta, cfg.rho};
  params.validate();
  const Layout layout = parse_layout(cfg.layout);
  const BenchmarkRun run = solve_benchmark(params, layout, delta_rule(cfg)(cfg.N), cfg.mu0, solver_settings(cfg));
  const ErrorRecord rec = measure(run, layout);
  if (!cfg.matrix_out.empty()) {
    std::ofstream f(cfg.matrix_out);
    if (!f) throw InvalidArgument("cannot open matrix output file " + cfg.matrix_out);
    write_matrix_market(f, run.system.matrix);
  }

  std::ostringstream os;
  if (cfg.format == "json") {
    os << record_to_json(rec).dump(2) << "\n";
  } else if (cfg.format == "md") {
    os << "| layout | N | eps | e_eps | e_sd | iters | converged |\n|---|---|---|---|---|---|---|\n";
    os << "| " << to_string(layout) << " | " << rec.N << " | " << format_double(rec.eps) << " | "
       << format_sci(rec.e_eps) << " | " << format_sci(rec.e_sd) << " | " << rec.stats.iterations << " | "
       << (rec.stats.converged ? "true" : "false") << " |\n";
  } else {
    write_records_csv(os, {rec});
  }
  emit(cfg, os.str());
  if (!rec.stats.converged) {
    std::cerr << "error: GMRES did not converge: " << rec.stats.iterations << " iterations, " << rec.stats.restarts
              << " restarts, relative residual " << format_sci(rec.stats.relative_residual) << "\n";
    return kSolverFailure;
  }
  return kOk;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (auto part : split(s, ',')) out.push_back(parse_int(part));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

int cmd_study(const RunConfig& cfg) {
  check_format(cfg);
  StudyOptions opt;
  opt.N_list = parse_int_list(cfg.N_list);
  opt.eps_list = parse_double_list(cfg.eps_list);
  for (double e : opt.eps_list)
    if (!(e > 0.0)) throw InvalidArgument("eps values must be positive");
  opt.layout = parse_layout(cfg.layout);
  opt.delta_rule = delta_rule(cfg);
  opt.mu0 = cfg.mu0;
  opt.beta = cfg.beta;
  opt.rho = cfg.rho;
  opt.solver = solver_settings(cfg);
  opt.solver.assembly_jobs = 1;
  opt.jobs = cfg.jobs;
  for (std::size_t k = 0; k + 1 < opt.N_list.size(); ++k)
    if (opt.N_list[k + 1] != 2 * opt.N_list[k])
      std::cerr << "warning: N list is not a doubling chain; rates are reported only for doubling pairs\n";

  const ConvergenceTable table = run_study(opt);

  std::ostringstream shown;
  if (cfg.format == "json") shown << table_to_json(table).dump(2) << "\n";
  else if (cfg.format == "csv") write_table_csv(shown, table);
  else write_table_markdown(shown, table);

  if (cfg.out.empty()) {
    std::cout << shown.str();
  } else {
    auto write = [](const std::string& path, auto&& fn) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw InvalidArgument("cannot open output file " + path);
      fn(f);
    };
    write(cfg.out + ".csv", [&](std::ostream& f) { write_records_csv(f, table.records); });
    write(cfg.out + "_table.csv", [&](std::ostream& f) { write_table_csv(f, table); });
    write(cfg.out + ".md", [&](std::ostream& f) { write_table_markdown(f, table); });
    write(cfg.out + "_plot.csv", [&](std::ostream& f) { write_plot_csv(f, table); });
    if (cfg.format == "json") write(cfg.out + ".json", [&](std::ostream& f) { f << shown.str(); });
    std::cout << shown.str();
  }
  if (!table.complete()) {
    std::cerr << "error: study incomplete (some solves did not converge); affected rows are marked\n";
    return kIncompleteStudy;
  }
  return kOk;
}

int cmd_check(const RunConfig& cfg) {
  verify::SuiteOptions opt;
  opt.seed = cfg.seed;
  opt.inject_delta_violation = cfg.inject_delta_violation;
  const auto results = verify::run_property_suite(opt);
  bool all = true;
  nlohmann::json j = nlohmann::json::array();
  std::ostringstream text;
  for (const auto& r : results) {
    all = all && r.passed;
    j.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    text << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
  }
  if (cfg.format == "json") emit(cfg, nlohmann::json{{"passed", all}, {"seed", cfg.seed}, {"checks", j}}.dump(2) + "\n");
  else emit(cfg, text.str());
  return all ? kOk : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"Streamline-diffusion FEM on Shishkin triangular, rectangular and hybrid meshes"};
  app.require_subcommand(1);

  auto* mesh = app.add_subcommand("mesh", "build, validate and export a Shishkin mesh as JSON");
  mesh->add_option("--N", cfg.N, "intervals per direction (divisible by 6)")->required();
  add_mesh_flags(mesh, cfg);
  mesh->add_option("--out", cfg.out, "mesh JSON path (stdout when omitted)");

  auto* solve = app.add_subcommand("solve", "solve the benchmark once and report ||u^I - u^N||");
  solve->add_option("--N", cfg.N, "intervals per direction (divisible by 6)")->required();
  add_mesh_flags(solve, cfg);
  add_solver_flags(solve, cfg);
  solve->add_option("--format", cfg.format, "csv|md|json");
  solve->add_option("--out", cfg.out, "output path (stdout when omitted)");
  solve->add_option("--matrix-out", cfg.matrix_out, "dump the system matrix in MatrixMarket format");

  auto* study = app.add_subcommand("study", "convergence study: max over an eps sweep, rates per doubling");
  study->add_option("--N", cfg.N_list, "comma-separated doubling chain of N");
  study->add_option("--eps-list", cfg.eps_list, "comma-separated eps values");
  study->add_option("--layout", cfg.layout, "triangular|rectangular|hybrid1|hybrid2");
  study->add_option("--rho", cfg.rho, "transition constant rho");
  study->add_option("--beta", cfg.beta, "lower bound beta of b");
  add_solver_flags(study, cfg);
  cfg.format = "md";
  study->add_option("--format", cfg.format, "csv|md|json (stdout rendering)");
  study->add_option("--out", cfg.out, "output prefix: writes PREFIX.csv, PREFIX_table.csv, PREFIX.md, PREFIX_plot.csv");

  auto* check = app.add_subcommand("check", "run the property suite");
  check->add_option("--seed", cfg.seed, "seed for randomized properties");
  check->add_option("--format", cfg.format, "md|json");
  check->add_option("--out", cfg.out, "report path (stdout when omitted)");
  check->add_flag("--inject-delta-violation", cfg.inject_delta_violation,
                  "use delta_s above the coercivity bound (the guard must reject it)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*mesh) return cmd_mesh(cfg);
    if (*solve) {
      if (solve->count("--format") == 0) cfg.format = "csv";
      return cmd_solve(cfg);
    }
    if (*study) return cmd_study(cfg);
    if (*check) return cmd_check(cfg);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
