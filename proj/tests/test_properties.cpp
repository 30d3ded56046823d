#include <gtest/gtest.h>

#include "layerfem/analysis.hpp"
#include "layerfem/verification.hpp"

using namespace layerfem;

TEST(PropertySuite, AllChecksPass) {
  for (const auto& r : verify::run_property_suite({}))
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(PropertySuite, InjectedDeltaViolationIsCaught) {
  verify::SuiteOptions opt;
  opt.inject_delta_violation = true;
  bool coercivity_failed = false;
  for (const auto& r : verify::run_property_suite(opt))
    if (r.name == "coercivity") coercivity_failed = !r.passed;
  EXPECT_TRUE(coercivity_failed);
}

class Coercivity : public ::testing::TestWithParam<std::tuple<Layout, double>> {};

TEST_P(Coercivity, HalfSdNormLowerBound) {
  const auto [layout, eps] = GetParam();
  const auto mesh = build_mesh({12, eps, 1.0, 2.5}, layout);
  const auto bp = benchmark_problem(eps, 2.0);
  const auto report = coercivity_check(mesh, bp.problem, standard_delta_rule(12), 100, 123);
  EXPECT_TRUE(report.passed()) << "min ratio " << report.min_ratio;
  EXPECT_GE(report.min_ratio, 0.5);
}

INSTANTIATE_TEST_SUITE_P(Layouts, Coercivity,
                         ::testing::Combine(::testing::Values(Layout::Triangular, Layout::Rectangular,
                                                              Layout::HybridI, Layout::HybridII),
                                            ::testing::Values(1e-3, 1e-8, 1e-16)));

// Hybrid I differs from the rectangular mesh only inside the coarse-in-y part of
// the exponential layer, where the solution is nearly one-dimensional in x.
TEST(LayoutConsistency, HybridsTrackTheirParents) {
  for (int N : {24, 48}) {
    const double rect = supercloseness_error(N, 1e-8, Layout::Rectangular).e_sd;
    const double h1 = supercloseness_error(N, 1e-8, Layout::HybridI).e_sd;
    const double tri = supercloseness_error(N, 1e-8, Layout::Triangular).e_sd;
    const double h2 = supercloseness_error(N, 1e-8, Layout::HybridII).e_sd;
    EXPECT_NEAR(h1 / rect, 1.0, 0.05) << N;
    EXPECT_NEAR(h2 / tri, 1.0, 0.05) << N;
  }
}

TEST(ErrorMeasures, SdDominatesEpsNorm) {
  for (Layout layout : kAllLayouts)
    for (double eps : {1e-6, 1e-16}) {
      const auto r = supercloseness_error(12, eps, layout);
      EXPECT_GE(r.e_sd, r.e_eps);
      EXPECT_GT(r.e_eps, 0.0);
    }
}

TEST(Interpolation, SmoothRegionErrorIsSecondOrder) {
  std::vector<double> h, e;
  for (int N : {12, 24, 48, 96}) {
    const auto mesh = build_mesh({N, 1e-8, 1.0, 2.5}, Layout::Triangular);
    h.push_back(1.0 / N);
    e.push_back(sampled_interpolation_error(mesh, ExactSolution(1e-8),
                                            [](const Cell& c) { return c.region == RegionTag::Omega_s; }));
  }
  EXPECT_GE(fitted_order(h, e), 1.9);
}
