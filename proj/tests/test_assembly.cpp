#include <gtest/gtest.h>

#include "layerfem/analysis.hpp"
#include "layerfem/verification.hpp"

using namespace layerfem;

namespace {

ShishkinMesh single_cell(std::vector<Point> nodes, CellKind kind) {
  ShishkinMesh m;
  m.nodes = std::move(nodes);
  Cell c;
  c.kind = kind;
  for (int k = 0; k < c.vertex_count(); ++k) c.vertex_ids[k] = k;
  m.cells.push_back(c);
  return m;
}

Problem constant_problem(double eps, double b, double c, Problem::Coefficient f) {
  Problem p;
  p.b = [b](const Point&) { return b; };
  p.b_x = [](const Point&) { return 0.0; };
  p.c = [c](const Point&) { return c; };
  p.f = std::move(f);
  p.eps = eps;
  return p;
}

const ShishkinMesh kUnitTriangle =
    single_cell({Point::from_values(0, 0), Point::from_values(1, 0), Point::from_values(0, 1)}, CellKind::TriK1);

}  // namespace

TEST(LocalMatrix, P1StiffnessOnReferenceTriangle) {
  const auto pr = constant_problem(1.0, 0.0, 0.0, [](const Point&) { return 0.0; });
  const auto lm = local_matrix(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.0);
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(lm.a[r][s], expect[r][s], 1e-15);
}

TEST(LocalMatrix, P1MassOnReferenceTriangle) {
  const auto pr = constant_problem(0.0, 0.0, 1.0, [](const Point&) { return 0.0; });
  const auto lm = local_matrix(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.0);
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(lm.a[r][s], r == s ? 1.0 / 12.0 : 1.0 / 24.0, 1e-16);
}

TEST(LocalMatrix, Q1StiffnessOnUnitSquare) {
  const auto sq = single_cell({Point::from_values(0, 0), Point::from_values(1, 0), Point::from_values(1, 1),
                               Point::from_values(0, 1)},
                              CellKind::Quad);
  const auto pr = constant_problem(1.0, 0.0, 0.0, [](const Point&) { return 0.0; });
  const auto lm = local_matrix(sq, sq.cells[0], pr, 0.0);
  const double d = 2.0 / 3.0, e = -1.0 / 6.0, o = -1.0 / 3.0;
  const double expect[4][4] = {{d, e, o, e}, {e, d, e, o}, {o, e, d, e}, {e, o, e, d}};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) EXPECT_NEAR(lm.a[r][s], expect[r][s], 1e-15);
}

TEST(LocalMatrix, StreamlineTermIsDeltaBSquaredStiffnessX) {
  // With eps = c = 0 and b = 1: a_rs = int phi_s,x phi_r + delta int phi_s,x phi_r,x.
  const auto pr = constant_problem(0.0, 1.0, 0.0, [](const Point&) { return 0.0; });
  const auto a0 = local_matrix(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.0);
  const auto a1 = local_matrix(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.3);
  const double kxx[3][3] = {{0.5, -0.5, 0.0}, {-0.5, 0.5, 0.0}, {0.0, 0.0, 0.0}};
  for (int r = 0; r < 3; ++r)
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(a1.a[r][s] - a0.a[r][s], 0.3 * kxx[r][s], 1e-15);
}

TEST(LocalRhs, LinearSourceOnReferenceTriangle) {
  const auto pr = constant_problem(1.0, 1.0, 0.0, [](const Point& p) { return p.x.value; });
  const auto lv = local_rhs(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.0);
  EXPECT_NEAR(lv.v[0], 1.0 / 24.0, 1e-16);
  EXPECT_NEAR(lv.v[1], 1.0 / 12.0, 1e-16);
  EXPECT_NEAR(lv.v[2], 1.0 / 24.0, 1e-16);
}

TEST(LocalRhs, NonFiniteSourceRaises) {
  const auto pr = constant_problem(1.0, 1.0, 0.0, [](const Point&) { return std::nan(""); });
  EXPECT_THROW(local_rhs(kUnitTriangle, kUnitTriangle.cells[0], pr, 0.0), NumericalError);
}

TEST(Stabilization, BoundIsMu0OverTwiceCSquared) {
  const auto mesh = build_mesh({12, 1e-6, 1.0, 2.5}, Layout::Triangular);
  const auto bp = benchmark_problem(1e-6, 2.0);
  for (double b : delta_bounds(mesh, bp.problem)) EXPECT_NEAR(b, 2.0 / (2.0 * 2.25), 1e-15);
  EXPECT_NO_THROW(validate_stabilization(standard_delta_rule(12), mesh, bp.problem));
  StabilizationConfig bad = standard_delta_rule(12);
  bad.delta_s = 0.5;
  EXPECT_THROW(assemble(mesh, bp.problem, bad), StabilizationBoundError);
  bad = standard_delta_rule(12);
  bad.delta_xy = -1e-3;
  EXPECT_THROW(assemble(mesh, bp.problem, bad), StabilizationBoundError);
}

TEST(Assembly, BoundaryEliminated) {
  const int N = 12;
  const auto mesh = build_mesh({N, 1e-6, 1.0, 2.5}, Layout::HybridI);
  const auto sys = assemble(mesh, benchmark_problem(1e-6).problem, standard_delta_rule(N));
  EXPECT_EQ(sys.dofs.size(), (N - 1) * (N - 1));
  EXPECT_EQ(sys.matrix.n, sys.dofs.size());
  EXPECT_EQ(sys.eliminated.size(), static_cast<std::size_t>(4 * N));
  for (int d = 0; d < sys.dofs.size(); ++d) EXPECT_FALSE(mesh.on_boundary[sys.dofs.dof_to_node[d]]);
}

TEST(Assembly, MassEntriesSumToArea) {
  // Total of all local mass entries is int 1 = |Omega| for any layout.
  for (Layout layout : kAllLayouts) {
    const auto mesh = build_mesh({24, 1e-10, 1.0, 2.5}, layout);
    const auto pr = constant_problem(0.0, 0.0, 1.0, [](const Point&) { return 0.0; });
    double total = 0.0;
    for (const Cell& c : mesh.cells) {
      const auto lm = local_matrix(mesh, c, pr, 0.0);
      for (int r = 0; r < lm.n; ++r)
        for (int s = 0; s < lm.n; ++s) total += lm.a[r][s];
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << to_string(layout);
  }
}

TEST(Assembly, ParallelLocalWorkIsBitwiseIdentical) {
  const auto mesh = build_mesh({24, 1e-8, 1.0, 2.5}, Layout::HybridII);
  const auto pr = benchmark_problem(1e-8).problem;
  const auto serial = assemble(mesh, pr, standard_delta_rule(24), {AssemblyQuadrature{}, 1});
  const auto threaded = assemble(mesh, pr, standard_delta_rule(24), {AssemblyQuadrature{}, 3});
  EXPECT_EQ(serial.matrix.val, threaded.matrix.val);
  EXPECT_EQ(serial.matrix.col, threaded.matrix.col);
  EXPECT_EQ(serial.rhs, threaded.rhs);
}

TEST(Assembly, MatchesDenseOracle) {
  for (Layout layout : kAllLayouts)
    for (double eps : {1e-2, 1e-6}) {
      const auto mesh = build_mesh({6, eps, 1.0, 2.5}, layout);
      const auto pr = benchmark_problem(eps).problem;
      const auto config = standard_delta_rule(6);
      const auto sys = assemble(mesh, pr, config);
      const auto dense = verify::dense_oracle_assembly(mesh, pr, config);
      EXPECT_LE(verify::matrix_discrepancy(sys.matrix, dense.matrix), 1e-12) << to_string(layout) << " " << eps;
    }
}

// The bilinear-form integrands have degree <= 2 on triangles when b is affine,
// so raising the triangle rule from degree 4 to 5 must not change the matrix.
TEST(Assembly, TriangleRuleDegreeInvariance) {
  const auto mesh = build_mesh({12, 1e-6, 1.0, 2.5}, Layout::Triangular);
  const auto pr = benchmark_problem(1e-6).problem;
  const auto a4 = assemble(mesh, pr, standard_delta_rule(12), {AssemblyQuadrature::with_degrees(4, 5), 1});
  const auto a5 = assemble(mesh, pr, standard_delta_rule(12), {AssemblyQuadrature::with_degrees(5, 5), 1});
  ASSERT_EQ(a4.matrix.val.size(), a5.matrix.val.size());
  double scale = 0.0;
  for (double v : a4.matrix.val) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < a4.matrix.val.size(); ++k)
    EXPECT_NEAR(a4.matrix.val[k], a5.matrix.val[k], 1e-12 * scale);
}

TEST(NormMatrices, QuadraticFormsMatchNormParts) {
  const auto mesh = build_mesh({12, 1e-6, 1.0, 2.5}, Layout::HybridI);
  const auto pr = benchmark_problem(1e-6).problem;
  const auto config = standard_delta_rule(12);
  const auto nm = assemble_norm_matrices(mesh, pr, config);
  const DofMap dofs = DofMap::interior(mesh);
  std::vector<double> v(dofs.size());
  for (int d = 0; d < dofs.size(); ++d) v[d] = std::sin(1.0 + d);
  const auto parts = norm_parts(FEFunction::from_dofs(mesh, dofs, v), &pr, config);
  EXPECT_NEAR(quadratic_form(nm.stiffness, v), parts.h1_semi_sq, 1e-12 * parts.h1_semi_sq);
  EXPECT_NEAR(quadratic_form(nm.mass, v), parts.l2_sq, 1e-12 * parts.l2_sq);
  EXPECT_NEAR(quadratic_form(nm.streamline, v), parts.streamline_sq, 1e-12 * parts.streamline_sq);
}
