#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "layerfem/problems.hpp"
#include "layerfem/verification.hpp"

using namespace layerfem;

namespace {

// Textbook form of the solution, evaluated in long double; fine for moderate eps.
long double naive_u(long double x, long double y, long double eps) {
  const long double s = std::sqrt(eps);
  const long double X = std::sin(std::numbers::pi_v<long double> * x / 2) -
                        (std::exp(-(1 - x) / eps) - std::exp(-1 / eps)) / (1 - std::exp(-1 / eps));
  const long double Y = (1 - std::exp(-y / s)) * (1 - std::exp(-(1 - y) / s)) / (1 - std::exp(-1 / s));
  return X * Y;
}

}  // namespace

TEST(ExactSolution, ReferenceValues) {
  EXPECT_NEAR(exact_u(0.5, 0.5, 1e-6), 0.7071068, 1e-7);
  const Vec2 g = exact_grad(0.5, 0.5, 1e-6);
  EXPECT_NEAR(g[0], 1.110721, 1e-6);
  EXPECT_NEAR(g[1], 0.0, 1e-12);
  EXPECT_NEAR(rhs_f(0.5, 0.5, 1e-6), 2.7268, 1e-4);
}

TEST(ExactSolution, LayerBracketAtOneLayerWidth) {
  const double eps = 1e-6;
  const ExactSolution u(eps);
  EXPECT_NEAR(u.x_layer_bracket(Coordinate::from_complement(eps)), -std::exp(-1.0), 1e-7);
}

TEST(ExactSolution, MatchesNaiveFormula) {
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const ExactSolution u(eps);
    for (double x : {0.0, 0.1, 0.5, 0.97, 0.999, 1.0})
      for (double y : {0.0, 0.01, 0.3, 0.5, 0.995, 1.0})
        EXPECT_NEAR(u.value(x, y), static_cast<double>(naive_u(x, y, eps)), 1e-14) << eps << " " << x << " " << y;
  }
}

TEST(ExactSolution, GradientMatchesFiniteDifferences) {
  const double eps = 1e-2;
  const ExactSolution u(eps);
  const long double h = 1e-6L;
  for (double x : {0.2, 0.6, 0.95, 0.99})
    for (double y : {0.05, 0.4, 0.93}) {
      const long double fx = (naive_u(x + h, y, eps) - naive_u(x - h, y, eps)) / (2 * h);
      const long double fy = (naive_u(x, y + h, eps) - naive_u(x, y - h, eps)) / (2 * h);
      const Vec2 g = u.grad(x, y);
      EXPECT_NEAR(g[0], static_cast<double>(fx), 1e-6 * (1 + std::abs(g[0])));
      EXPECT_NEAR(g[1], static_cast<double>(fy), 1e-6 * (1 + std::abs(g[1])));
    }
}

TEST(ExactSolution, HomogeneousDirichletData) {
  for (double eps : {1e-2, 1e-8, 1e-16}) {
    const ExactSolution u(eps);
    for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      EXPECT_EQ(u.value(Point{Coordinate::from_value(0.0), Coordinate::from_value(t)}), 0.0);
      EXPECT_EQ(u.value(Point{Coordinate::from_complement(0.0), Coordinate::from_value(t)}), 0.0);
      EXPECT_EQ(u.value(Point{Coordinate::from_value(t), Coordinate::from_value(0.0)}), 0.0);
      EXPECT_EQ(u.value(Point{Coordinate::from_value(t), Coordinate::from_complement(0.0)}), 0.0);
    }
  }
}

TEST(ExactSolution, FiniteInsideTinyLayers) {
  const double eps = 1e-16;
  const ExactSolution u(eps);
  for (double d : {0.0, 1e-18, 1e-16, 5e-16, 1e-14, 1e-3}) {
    const Point p{Coordinate::from_complement(d), Coordinate::from_value(1e-9)};
    EXPECT_TRUE(std::isfinite(u.value(p)));
    EXPECT_TRUE(std::isfinite(u.grad(p)[0]));
    EXPECT_TRUE(std::isfinite(u.grad(p)[1]));
    EXPECT_TRUE(std::isfinite(u.rhs(p)));
  }
}

TEST(ExactSolution, LayerFactorsDecompose) {
  const auto lf = layer_factors(0.999, 0.001, 1e-4);
  EXPECT_NEAR(lf.factor_x, lf.smooth_x - lf.layer_x, 1e-15);
  EXPECT_NEAR(lf.factor_x * lf.factor_y, exact_u(0.999, 0.001, 1e-4), 1e-15);
}

TEST(ExactSolution, ManufacturedRhsSatisfiesPde) {
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8})
    for (double x : {0.1, 0.5, 0.9})
      for (double y : {0.01, 0.5, 0.99}) {
        const auto [res, scale] = verify::pde_residual(eps, Point::from_values(x, y));
        EXPECT_LE(std::abs(static_cast<double>(res)), 1e-8 * static_cast<double>(scale)) << eps << " " << x << " " << y;
      }
}

TEST(Benchmark, CoefficientsAndAssumptions) {
  const auto bp = benchmark_problem(1e-6, 2.0);
  const Point p = Point::from_values(0.25, 0.75);
  EXPECT_EQ(bp.problem.b(p), 1.75);
  EXPECT_EQ(bp.problem.b_x(p), -1.0);
  EXPECT_EQ(bp.problem.c(p), 1.5);
  EXPECT_NO_THROW(bp.problem.validate());
  // c - b_x/2 = 2, so mu0 above 2 is inadmissible.
  EXPECT_THROW(benchmark_problem(1e-6, 2.5).problem.validate(), InvalidArgument);
}
