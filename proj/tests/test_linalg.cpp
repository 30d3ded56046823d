#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "layerfem/analysis.hpp"
#include "layerfem/linalg.hpp"

using namespace layerfem;

TEST(Sparse, TripletsSumDuplicates) {
  const auto A = from_triplets(3, {{0, 0, 1.0}, {2, 1, 4.0}, {0, 0, 2.0}, {1, 2, -1.0}, {2, 1, 0.5}});
  EXPECT_EQ(A.at(0, 0), 3.0);
  EXPECT_EQ(A.at(2, 1), 4.5);
  EXPECT_EQ(A.at(1, 2), -1.0);
  EXPECT_EQ(A.at(1, 1), 0.0);
  EXPECT_EQ(A.nonzeros(), 3u);
}

TEST(Sparse, SpmvMatchesDense) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 9;
  std::vector<std::vector<double>> D(n, std::vector<double>(n, 0.0));
  for (auto& row : D)
    for (double& v : row)
      if (u(rng) > 0.3) v = u(rng);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  const auto y = spmv(SparseMatrix::from_dense(D), x);
  for (int r = 0; r < n; ++r) {
    double ref = 0.0;
    for (int c = 0; c < n; ++c) ref += D[r][c] * x[c];
    EXPECT_NEAR(y[r], ref, 1e-15);
  }
}

TEST(Gmres, SmallNonsymmetricSystem) {
  const auto A = SparseMatrix::from_dense({{4, 1}, {1, 3}});
  std::vector<double> b{1, 2}, x{0, 0};
  for (auto kind : {PreconditionerKind::None, PreconditionerKind::Jacobi, PreconditionerKind::ILU0}) {
    x = {0, 0};
    const auto stats = gmres(A, b, x, build_preconditioner(A, kind));
    EXPECT_TRUE(stats.converged);
    EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-14);
    EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-14);
    EXPECT_LE(stats.relative_residual, 1e-12);
  }
}

TEST(Gmres, ZeroRhsGivesZero) {
  const auto A = SparseMatrix::from_dense({{2, 1}, {0, 3}});
  std::vector<double> b{0, 0}, x{5, 5};
  const auto stats = gmres(A, b, x, build_preconditioner(A, PreconditionerKind::None));
  EXPECT_TRUE(stats.converged);
  EXPECT_EQ(x[0], 0.0);
  EXPECT_EQ(x[1], 0.0);
}

TEST(Ilu0, ExactOnTriangularMatrix) {
  const auto A = SparseMatrix::from_dense({{2, 0, 0}, {1, 3, 0}, {0, -1, 4}});
  std::vector<double> b{2, 5, 7}, x(3, 0.0);
  const auto stats = gmres(A, b, x, build_preconditioner(A, PreconditionerKind::ILU0));
  EXPECT_TRUE(stats.converged);
  EXPECT_EQ(stats.iterations, 1);
  EXPECT_NEAR(x[0], 1.0, 1e-14);
  EXPECT_NEAR(x[1], 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(x[2], (7.0 + 4.0 / 3.0) / 4.0, 1e-14);
}

TEST(Ilu0, ZeroPivotReported) {
  const auto A = SparseMatrix::from_dense({{0, 1}, {1, 1}});
  try {
    build_preconditioner(A, PreconditionerKind::ILU0);
    FAIL() << "zero pivot not detected";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos) << e.what();
  }
}

TEST(Gmres, Ilu0BeatsUnpreconditionedOnBenchmark) {
  const auto mesh = build_mesh({24, 1e-8, 1.0, 2.5}, Layout::Triangular);
  const auto bp = benchmark_problem(1e-8);
  const auto sys = assemble(mesh, bp.problem, standard_delta_rule(24));
  std::vector<double> x0(sys.dofs.size(), 0.0), x1 = x0;
  GmresOptions opt;
  opt.max_outer = 50;
  const auto plain = gmres(sys.matrix, sys.rhs, x0, build_preconditioner(sys.matrix, PreconditionerKind::None), opt);
  const auto ilu = gmres(sys.matrix, sys.rhs, x1, build_preconditioner(sys.matrix, PreconditionerKind::ILU0), opt);
  EXPECT_TRUE(ilu.converged);
  EXPECT_LE(ilu.relative_residual, opt.tol);
  EXPECT_LT(ilu.iterations, plain.iterations);
}

TEST(Gmres, ReportsNonConvergence) {
  const auto mesh = build_mesh({24, 1e-8, 1.0, 2.5}, Layout::Rectangular);
  const auto bp = benchmark_problem(1e-8);
  const auto sys = assemble(mesh, bp.problem, standard_delta_rule(24));
  std::vector<double> x(sys.dofs.size(), 0.0);
  GmresOptions opt{2, 1e-14, 1};
  const auto stats = gmres(sys.matrix, sys.rhs, x, build_preconditioner(sys.matrix, PreconditionerKind::None), opt);
  EXPECT_FALSE(stats.converged);
  EXPECT_GT(stats.relative_residual, opt.tol);
  EXPECT_NEAR(stats.relative_residual, relative_residual(sys.matrix, x, sys.rhs), 1e-12);
}

TEST(Preconditioner, ParseNames) {
  EXPECT_EQ(parse_preconditioner("none"), PreconditionerKind::None);
  EXPECT_EQ(parse_preconditioner("jacobi"), PreconditionerKind::Jacobi);
  EXPECT_EQ(parse_preconditioner("ilu0"), PreconditionerKind::ILU0);
  EXPECT_THROW(parse_preconditioner("amg"), InvalidArgument);
}

TEST(MatrixMarket, HeaderAndEntries) {
  std::ostringstream os;
  write_matrix_market(os, from_triplets(2, {{0, 0, 1.5}, {1, 0, -2.0}}));
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  EXPECT_NE(s.find("2 2 2"), std::string::npos);
  EXPECT_NE(s.find("2 1 -2"), std::string::npos);
}
