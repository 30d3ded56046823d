#pragma once

// Independent oracles and the property suite behind `layerfem check`.
//
// Nothing here evaluates basis functions or quadrature through fem_core: the
// oracles use their own physical-coordinate hat functions, a hard-coded
// 5-point Gauss-Legendre rule and a collapsed (Duffy) triangle rule.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "layerfem/analysis.hpp"
#include "layerfem/assembly.hpp"
#include "layerfem/fem_core.hpp"
#include "layerfem/io.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/norms.hpp"
#include "layerfem/problems.hpp"

namespace layerfem::verify {

// ------------------------------------------------------------ closed forms

/// int over the reference triangle of x^a y^b = a! b! / (a + b + 2)!
inline double triangle_monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

/// int over [-1,1]^2 of x^a y^b
inline double square_monomial_integral(int a, int b) {
  auto one = [](int k) { return k % 2 ? 0.0 : 2.0 / (k + 1.0); };
  return one(a) * one(b);
}

/// Largest relative error over all monomials x^a y^b with a + b <= rule.exact_degree.
inline double quadrature_exactness_error(ElementKind kind, const QuadratureRule& rule) {
  double worst = 0.0;
  for (int deg = 0; deg <= rule.exact_degree; ++deg)
    for (int a = 0; a <= deg; ++a) {
      const int b = deg - a;
      double q = 0.0;
      for (std::size_t k = 0; k < rule.size(); ++k)
        q += rule.weights[k] * std::pow(rule.points[k].xi, a) * std::pow(rule.points[k].eta, b);
      const double exact =
          kind == ElementKind::P1Tri ? triangle_monomial_integral(a, b) : square_monomial_integral(a, b);
      const double scale = std::max(std::abs(exact), kind == ElementKind::P1Tri ? triangle_monomial_integral(deg, 0)
                                                                                 : 2.0 / (deg + 1.0));
      worst = std::max(worst, std::abs(q - exact) / scale);
    }
  return worst;
}

// ------------------------------------------------------------ dense oracle

struct OracleSample {
  Point point;
  double weight;  ///< physical weight
};

/// 5-point Gauss-Legendre on [0,1].
inline std::array<std::pair<double, double>, 5> gauss5_unit() {
  const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
  const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
  const std::array<std::pair<double, double>, 5> g{{{-b, wb}, {-a, wa}, {0.0, 128.0 / 225.0}, {a, wa}, {b, wb}}};
  std::array<std::pair<double, double>, 5> out{};
  for (int i = 0; i < 5; ++i) out[i] = {0.5 * (g[i].first + 1.0), 0.5 * g[i].second};
  return out;
}

/// Degree-9-exact samples of a grid rectangle or one of its two triangles,
/// built from the grid-cell geometry (not from the cell's vertex list).
inline std::vector<OracleSample> oracle_samples(const ShishkinMesh& mesh, const Cell& cell) {
  const auto [i, j] = cell.grid_cell;
  const Coordinate x0 = mesh.grid_x.coords[i], y0 = mesh.grid_y.coords[j];
  const double hx = mesh.grid_x.widths[i], hy = mesh.grid_y.widths[j];
  const auto g = gauss5_unit();
  std::vector<OracleSample> out;
  for (const auto& [u, wu] : g)
    for (const auto& [v, wv] : g) {
      if (cell.kind == CellKind::Quad) {
        out.push_back({{x0.shifted(u * hx), y0.shifted(v * hy)}, wu * wv * hx * hy});
      } else {
        // Duffy: (s, t) = (u, v (1 - u)) covers {s + t <= 1} with Jacobian (1 - u).
        const double s = u, t = v * (1.0 - u);
        const double w = wu * wv * (1.0 - u) * hx * hy;
        if (cell.kind == CellKind::TriK1)
          out.push_back({{x0.shifted(s * hx), y0.shifted(t * hy)}, w});
        else  // upper-right triangle: reflect through the rectangle centre
          out.push_back({{x0.shifted((1.0 - s) * hx), y0.shifted((1.0 - t) * hy)}, w});
      }
    }
  return out;
}

/// Value and gradient of the global hat function of `node` restricted to `cell`,
/// computed in physical coordinates.
inline std::array<double, 3> oracle_hat(const ShishkinMesh& mesh, const Cell& cell, int node, const Point& p) {
  const int N = mesh.N();
  const int ni = node % (N + 1), nj = node / (N + 1);
  const auto [i, j] = cell.grid_cell;
  const double hx = mesh.grid_x.widths[i], hy = mesh.grid_y.widths[j];
  const double s = span(mesh.grid_x.coords[i], p.x) / hx;  // local coordinates in [0,1]
  const double t = span(mesh.grid_y.coords[j], p.y) / hy;
  const int di = ni - i, dj = nj - j;  // 0 or 1
  if (cell.kind == CellKind::Quad) {
    const double fx = di ? s : 1.0 - s, gx = di ? 1.0 / hx : -1.0 / hx;
    const double fy = dj ? t : 1.0 - t, gy = dj ? 1.0 / hy : -1.0 / hy;
    return {fx * fy, gx * fy, fx * gy};
  }
  if (cell.kind == CellKind::TriK1) {
    if (di == 0 && dj == 0) return {1.0 - s - t, -1.0 / hx, -1.0 / hy};
    if (di == 1 && dj == 0) return {s, 1.0 / hx, 0.0};
    return {t, 0.0, 1.0 / hy};
  }
  if (di == 1 && dj == 1) return {s + t - 1.0, 1.0 / hx, 1.0 / hy};
  if (di == 0 && dj == 1) return {1.0 - s, -1.0 / hx, 0.0};
  return {1.0 - t, 0.0, -1.0 / hy};
}

struct DenseSystem {
  std::vector<std::vector<double>> matrix;
  std::vector<double> rhs;
};

/// Brute-force assembly: for every pair of interior nodes, integrate the bilinear
/// form over every cell containing both, with degree-9 quadrature.
inline DenseSystem dense_oracle_assembly(const ShishkinMesh& mesh, const Problem& problem,
                                         const StabilizationConfig& config) {
  const DofMap dofs = DofMap::interior(mesh);
  const int n = dofs.size();
  DenseSystem out{std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), std::vector<double>(n, 0.0)};
  auto contains = [](const Cell& c, int node) {
    for (int k = 0; k < c.vertex_count(); ++k)
      if (c.vertex_ids[k] == node) return true;
    return false;
  };
  for (int r = 0; r < n; ++r) {
    const int test_node = dofs.dof_to_node[r];
    for (const Cell& cell : mesh.cells) {
      if (!contains(cell, test_node)) continue;
      const double delta = delta_for(config, cell.region);
      const auto samples = oracle_samples(mesh, cell);
      for (const OracleSample& q : samples) {
        const auto v = oracle_hat(mesh, cell, test_node, q.point);
        const double test = v[0] + delta * problem.b(q.point) * v[1];
        out.rhs[r] += q.weight * problem.f(q.point) * test;
      }
      for (int s = 0; s < n; ++s) {
        const int trial_node = dofs.dof_to_node[s];
        if (!contains(cell, trial_node)) continue;
        double sum = 0.0;
        for (const OracleSample& q : samples) {
          const auto v = oracle_hat(mesh, cell, test_node, q.point);
          const auto u = oracle_hat(mesh, cell, trial_node, q.point);
          const double b = problem.b(q.point), c = problem.c(q.point);
          sum += q.weight * (problem.eps * (u[1] * v[1] + u[2] * v[2]) + (b * u[1] + c * u[0]) * (v[0] + delta * b * v[1]));
        }
        out.matrix[r][s] += sum;
      }
    }
  }
  return out;
}

/// max over rows of max_c |A(r,c) - oracle(r,c)| / max_c |oracle(r,c)|.
inline double matrix_discrepancy(const SparseMatrix& A, const std::vector<std::vector<double>>& dense) {
  double worst = 0.0;
  for (int r = 0; r < A.n; ++r) {
    double scale = 0.0, diff = 0.0;
    for (int c = 0; c < A.n; ++c) {
      scale = std::max(scale, std::abs(dense[r][c]));
      diff = std::max(diff, std::abs(A.at(r, c) - dense[r][c]));
    }
    if (scale > 0.0) worst = std::max(worst, diff / scale);
  }
  return worst;
}

// ------------------------------------------------------------ PDE residual

/// -eps Laplace(u) + (2-x) u_x + 1.5 u - f at p, with every derivative formed
/// naively in long double from the closed-form factors. Returns (residual, scale).
inline std::pair<long double, long double> pde_residual(double eps, const Point& p) {
  using L = long double;
  const L e = eps, s = std::sqrt(e), pi2 = std::numbers::pi_v<L> / 2;
  const L x = p.x.value, cx = p.x.complement, y = p.y.value, cy = p.y.complement;
  const L D = -std::expm1(-1 / e), Ds = -std::expm1(-1 / s);
  const L ex = std::exp(-cx / e);
  const L X = std::sin(pi2 * x) - (ex - std::exp(-1 / e)) / D;
  const L X1 = pi2 * std::cos(pi2 * x) - ex / (e * D);
  const L X2 = -pi2 * pi2 * std::sin(pi2 * x) - ex / (e * e * D);
  const L a = std::exp(-y / s), b = std::exp(-cy / s);
  const L Y = (1 - a) * (1 - b) / Ds;
  const L Y2 = -(a + b) / (e * Ds);
  const L lap = X2 * Y + X * Y2;
  const L lhs = -e * lap + (2 - x) * X1 * Y + L(1.5) * X * Y;
  const L f = ExactSolution(eps).rhs(p);
  const L scale = std::max({std::abs(f), std::abs(e * X2 * Y), std::abs((2 - x) * X1 * Y), L(1)});
  return {lhs - f, scale};
}

// ------------------------------------------------------------ the suite

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteOptions {
  unsigned seed = 42;
  bool inject_delta_violation = false;
};

inline std::string sci(double v) { return format_sci(v, 3); }

inline CheckResult check_quadrature() {
  double worst = 0.0;
  for (int d = 1; d <= 6; ++d) {
    worst = std::max(worst, quadrature_exactness_error(ElementKind::P1Tri, quadrature_for(ElementKind::P1Tri, d)));
    worst = std::max(worst, quadrature_exactness_error(ElementKind::Q1Quad, quadrature_for(ElementKind::Q1Quad, d)));
  }
  return {"quadrature_exactness", worst <= 1e-13, "max relative error " + sci(worst) + " (tol 1e-13)"};
}

inline CheckResult check_coercivity(const SuiteOptions& opt) {
  const int N = 12;
  const double eps = 1e-6;
  const BenchmarkProblem bp = benchmark_problem(eps);
  StabilizationConfig config = standard_delta_rule(N);
  if (opt.inject_delta_violation) config.delta_s = bp.problem.mu0 / (1.5 * 1.5);
  double min_ratio = std::numeric_limits<double>::infinity();
  int violations = 0;
  try {
    for (Layout layout : kAllLayouts) {
      const ShishkinMesh mesh = build_mesh({N, eps}, layout);
      const CoercivityReport rep = coercivity_check(mesh, bp.problem, config, 100, opt.seed);
      min_ratio = std::min(min_ratio, rep.min_ratio);
      violations += rep.violations;
    }
  } catch (const StabilizationBoundError& e) {
    return {"coercivity", false, std::string("stabilization guard rejected the configuration: ") + e.what()};
  }
  return {"coercivity", violations == 0,
          "min v'Av/||v||_SD^2 = " + sci(min_ratio) + " over 4 layouts x 100 vectors (need >= 0.5)"};
}

inline CheckResult check_dense_assembly() {
  const int N = 6;
  double worst_matrix = 0.0;
  for (double eps : {1e-2, 1e-6}) {
    const BenchmarkProblem bp = benchmark_problem(eps);
    const StabilizationConfig config = standard_delta_rule(N);
    for (Layout layout : kAllLayouts) {
      const ShishkinMesh mesh = build_mesh({N, eps}, layout);
      const DiscreteSystem sys = assemble(mesh, bp.problem, config);
      const DenseSystem oracle = dense_oracle_assembly(mesh, bp.problem, config);
      worst_matrix = std::max(worst_matrix, matrix_discrepancy(sys.matrix, oracle.matrix));
    }
  }
  return {"dense_oracle_assembly", worst_matrix <= 1e-12,
          "max entrywise discrepancy " + sci(worst_matrix) + " relative (tol 1e-12), N=6, all layouts"};
}

inline CheckResult check_pde_residual(const SuiteOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long double worst = 0.0L;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    for (int k = 0; k < 400; ++k) {
      Coordinate x;
      // Half the samples inside the exponential layer (10 eps < 1 - x < 50 eps).
      if (k % 2) x = Coordinate::from_complement(eps * (10.0 + 40.0 * unit(rng)));
      else x = Coordinate::from_value(unit(rng) * (1.0 - 10.0 * eps));
      const Coordinate y = Coordinate::from_value(unit(rng));
      const auto [res, scale] = pde_residual(eps, {x, y});
      worst = std::max(worst, std::abs(res) / scale);
    }
  }
  return {"pde_residual", worst <= 1e-8L,
          "max relative residual " + sci(static_cast<double>(worst)) + " for 1-x > 10 eps (tol 1e-8)"};
}

inline CheckResult check_norm_equivalence(const SuiteOptions& opt) {
  const int N = 12;
  const double eps = 1e-6;
  double worst = 0.0;
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Layout layout : kAllLayouts) {
    const ShishkinMesh mesh = build_mesh({N, eps}, layout);
    const BenchmarkProblem bp = benchmark_problem(eps);
    const StabilizationConfig config = standard_delta_rule(N);
    const NormMatrices nm = assemble_norm_matrices(mesh, bp.problem, config);
    const DofMap dofs = DofMap::interior(mesh);
    std::vector<double> v(dofs.size());
    for (int t = 0; t < 10; ++t) {
      for (double& c : v) c = unit(rng);
      const FEFunction fe = FEFunction::from_dofs(mesh, dofs, v);
      const double by_norm = sd_norm_sq(fe, bp.problem, config);
      const double by_matrix = eps * quadratic_form(nm.stiffness, v) + bp.problem.mu0 * quadratic_form(nm.mass, v) +
                               quadratic_form(nm.streamline, v);
      worst = std::max(worst, std::abs(by_norm - by_matrix) / by_matrix);
      const double e_by_norm = energy_norm_sq(fe, eps, bp.problem.mu0);
      const double e_by_matrix = eps * quadratic_form(nm.stiffness, v) + bp.problem.mu0 * quadratic_form(nm.mass, v);
      worst = std::max(worst, std::abs(e_by_norm - e_by_matrix) / e_by_matrix);
    }
  }
  return {"norm_quadratic_form_equivalence", worst <= 1e-12,
          "max relative discrepancy " + sci(worst) + " (tol 1e-12), N=12, all layouts"};
}

inline CheckResult check_solver_and_records() {
  double worst_residual = 0.0;
  bool all_converged = true, ordered = true;
  const double tol = 1e-12;
  for (Layout layout : kAllLayouts)
    for (double eps : {1e-6, 1e-16}) {
      const BenchmarkRun run = solve_benchmark({12, eps}, layout, standard_delta_rule(12));
      all_converged = all_converged && run.stats.converged;
      worst_residual = std::max(worst_residual, relative_residual(run.system.matrix, run.solution, run.system.rhs));
      const ErrorRecord rec = measure(run, layout);
      ordered = ordered && rec.e_sd >= rec.e_eps && rec.e_eps >= 0.0;
    }
  return {"solver_true_residual_and_record_order", all_converged && worst_residual <= tol && ordered,
          "recomputed residual " + sci(worst_residual) + " (tol 1e-12); e_sd >= e_eps: " + (ordered ? "yes" : "no")};
}

inline std::vector<CheckResult> run_property_suite(const SuiteOptions& opt = {}) {
  return {check_quadrature(),          check_coercivity(opt),         check_dense_assembly(),
          check_pde_residual(opt),     check_norm_equivalence(opt),   check_solver_and_records()};
}

}  // namespace layerfem::verify
