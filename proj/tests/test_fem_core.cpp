#include <gtest/gtest.h>

#include <numeric>

#include "layerfem/fem_core.hpp"
#include "layerfem/verification.hpp"

using namespace layerfem;

namespace {

// A one-cell mesh with the given vertices, for testing element maps directly.
ShishkinMesh single_cell(std::vector<Point> nodes, CellKind kind) {
  ShishkinMesh m;
  m.nodes = std::move(nodes);
  Cell c;
  c.kind = kind;
  for (int k = 0; k < c.vertex_count(); ++k) c.vertex_ids[k] = k;
  m.cells.push_back(c);
  return m;
}

}  // namespace

TEST(Shape, PartitionOfUnityAndNodalProperty) {
  const std::vector<RefPoint> tri_nodes{{0, 0}, {1, 0}, {0, 1}};
  for (int k = 0; k < 3; ++k) {
    const auto s = shape_eval(ElementKind::P1Tri, tri_nodes[k]);
    for (int m = 0; m < 3; ++m) EXPECT_DOUBLE_EQ(s.values[m], k == m ? 1.0 : 0.0);
  }
  const std::vector<RefPoint> quad_nodes{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (int k = 0; k < 4; ++k) {
    const auto s = shape_eval(ElementKind::Q1Quad, quad_nodes[k]);
    for (int m = 0; m < 4; ++m) EXPECT_DOUBLE_EQ(s.values[m], k == m ? 1.0 : 0.0);
  }
  for (auto kind : {ElementKind::P1Tri, ElementKind::Q1Quad}) {
    const auto s = shape_eval(kind, {0.2, 0.3});
    double sum = 0.0, gx = 0.0, gy = 0.0;
    for (int k = 0; k < s.count; ++k) sum += s.values[k], gx += s.grads[k][0], gy += s.grads[k][1];
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_NEAR(gx, 0.0, 1e-15);
    EXPECT_NEAR(gy, 0.0, 1e-15);
  }
}

TEST(Shape, QuadCenterValues) {
  const auto s = shape_eval(ElementKind::Q1Quad, {0.0, 0.0});
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(s.values[k], 0.25);
}

TEST(Quadrature, ExactForRequestedDegree) {
  for (int d = 1; d <= 6; ++d) {
    for (auto kind : {ElementKind::P1Tri, ElementKind::Q1Quad}) {
      const auto rule = quadrature_for(kind, d);
      EXPECT_GE(rule.exact_degree, d);
      EXPECT_LT(verify::quadrature_exactness_error(kind, rule), 1e-13) << "degree " << d;
      const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
      EXPECT_NEAR(total, kind == ElementKind::P1Tri ? 0.5 : 4.0, 1e-14);
    }
  }
}

TEST(Quadrature, RejectsUnsupportedDegree) {
  EXPECT_THROW(quadrature_for(ElementKind::P1Tri, 0), InvalidArgument);
  EXPECT_THROW(quadrature_for(ElementKind::Q1Quad, 7), InvalidArgument);
}

TEST(Quadrature, AssemblyRulesDefaults) {
  const AssemblyQuadrature q;
  EXPECT_GE(q.triangle.exact_degree, 4);
  EXPECT_EQ(q.quad.size(), 9u);
}

TEST(PhysicalMap, RectangleCenter) {
  const auto m = single_cell({Point::from_values(0, 0), Point::from_values(2, 0), Point::from_values(2, 1),
                              Point::from_values(0, 1)},
                             CellKind::Quad);
  const auto pm = map_to_physical(m, m.cells[0], {0.0, 0.0});
  EXPECT_DOUBLE_EQ(pm.point.x.value, 1.0);
  EXPECT_DOUBLE_EQ(pm.point.y.value, 0.5);
  EXPECT_DOUBLE_EQ(pm.det, 0.5);
}

TEST(PhysicalMap, TriangleAffine) {
  const auto m = single_cell({Point::from_values(1, 1), Point::from_values(3, 1), Point::from_values(1, 2)},
                             CellKind::TriK1);
  const auto pm = map_to_physical(m, m.cells[0], {0.5, 0.5});
  EXPECT_DOUBLE_EQ(pm.point.x.value, 2.0);
  EXPECT_DOUBLE_EQ(pm.point.y.value, 1.5);
  EXPECT_DOUBLE_EQ(pm.det, 2.0);
}

TEST(PhysicalMap, DegenerateCellThrows) {
  const auto m = single_cell({Point::from_values(0, 0), Point::from_values(1, 0), Point::from_values(2, 0)},
                             CellKind::TriK1);
  EXPECT_THROW(map_to_physical(m, m.cells[0], {0.2, 0.2}), DegenerateCell);
}

TEST(PhysicalMap, QuadratureAreasOnTinyCells) {
  const auto mesh = build_mesh({96, 1e-16, 1.0, 2.5}, Layout::HybridI);
  const AssemblyQuadrature quad;
  for (const Cell& c : mesh.cells) {
    double area = 0.0;
    for_each_quadrature_point(mesh, c, quad.for_cell(c), [&](const ElementValues& ev) { area += ev.jxw; });
    const double w = mesh.grid_x.widths[c.grid_cell[0]] * mesh.grid_y.widths[c.grid_cell[1]];
    EXPECT_NEAR(area / (c.kind == CellKind::Quad ? w : 0.5 * w), 1.0, 1e-9);
  }
}

TEST(PhysicalMap, GradientsReproduceLinearFunction) {
  // grad of the interpolant of g(x,y) = 3x - 2y equals (3, -2) on every cell.
  const auto mesh = build_mesh({12, 1e-4, 1.0, 2.5}, Layout::HybridII);
  const AssemblyQuadrature quad;
  for (const Cell& c : mesh.cells) {
    for_each_quadrature_point(mesh, c, quad.for_cell(c), [&](const ElementValues& ev) {
      double gx = 0.0, gy = 0.0;
      const Point& p0 = mesh.nodes[c.vertex_ids[0]];
      for (int k = 0; k < ev.count; ++k) {
        const Point& pk = mesh.nodes[c.vertex_ids[k]];
        const double g = 3.0 * span(p0.x, pk.x) - 2.0 * span(p0.y, pk.y);
        gx += g * ev.grad[k][0];
        gy += g * ev.grad[k][1];
      }
      EXPECT_NEAR(gx, 3.0, 1e-9);
      EXPECT_NEAR(gy, -2.0, 1e-9);
    });
  }
}
