#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "layerfem/error.hpp"
#include "layerfem/mesh.hpp"

namespace layerfem {

// Reference conventions: triangle (0,0),(1,0),(0,1); quadrilateral [-1,1]^2 with
// nodes counterclockwise from (-1,-1).

enum class ElementKind { P1Tri, Q1Quad };

inline ElementKind element_kind(const Cell& cell) {
  return cell.kind == CellKind::Quad ? ElementKind::Q1Quad : ElementKind::P1Tri;
}

inline constexpr int node_count(ElementKind kind) { return kind == ElementKind::Q1Quad ? 4 : 3; }

struct RefPoint {
  double xi = 0.0;
  double eta = 0.0;
};


struct ShapeValues {
  int count = 0;
  std::array<double, 4> values{};
  std::array<Vec2, 4> grads{};  ///< reference-coordinate gradients
};

inline ShapeValues shape_eval(ElementKind kind, RefPoint p) {
  ShapeValues s;
  if (kind == ElementKind::P1Tri) {
    s.count = 3;
    s.values = {1.0 - p.xi - p.eta, p.xi, p.eta, 0.0};
    s.grads[0] = {-1.0, -1.0};
    s.grads[1] = {1.0, 0.0};
    s.grads[2] = {0.0, 1.0};
    return s;
  }
  s.count = 4;
  static constexpr std::array<Vec2, 4> kNodes{{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};
  for (int k = 0; k < 4; ++k) {
    const double a = 1.0 + kNodes[k][0] * p.xi;
    const double b = 1.0 + kNodes[k][1] * p.eta;
    s.values[k] = 0.25 * a * b;
    s.grads[k] = {0.25 * kNodes[k][0] * b, 0.25 * a * kNodes[k][1]};
  }
  return s;
}

struct QuadratureRule {
  std::vector<RefPoint> points;
  std::vector<double> weights;
  int exact_degree = 0;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline void add_orbit3(QuadratureRule& r, double a, double w) {
  // Barycentric (a, a, 1-2a) and its permutations; weights scaled to area 1/2.
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({a, a});
  r.points.push_back({b, a});
  r.points.push_back({a, b});
  for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
}

inline void add_orbit6(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<RefPoint, 6> pts{{{a, b}, {b, a}, {a, c}, {c, a}, {b, c}, {c, b}}};
  for (const RefPoint& p : pts) {
    r.points.push_back(p);
    r.weights.push_back(0.5 * w);
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

inline QuadratureRule triangle_rule(int degree) {
  QuadratureRule r;
  if (degree <= 1) {
    r.points = {{1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {0.5};
    r.exact_degree = 1;
  } else if (degree == 2) {
    add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
    r.exact_degree = 2;
  } else if (degree <= 4) {
    // Dunavant degree 4.
    add_orbit3(r, 0.445948490915964886318329253883, 0.223381589678011465944827602495);
    add_orbit3(r, 0.091576213509770743459571463402, 0.109951743655321867388505730838);
    r.exact_degree = 4;
  } else if (degree == 5) {
    // Radon's 7-point rule, closed form.
    const double s = std::sqrt(15.0);
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5 * 9.0 / 40.0);
    add_orbit3(r, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
    add_orbit3(r, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    r.exact_degree = 5;
  } else {
    // Dunavant degree 6.
    add_orbit3(r, 0.249286745170910421291638553107, 0.116786275726379366030690538687);
    add_orbit3(r, 0.063089014491502228340331602870, 0.050844906370206816920936809106);
    add_orbit6(r, 0.053145049844816947353249671631, 0.310352451033784405416607733956, 0.082851075618373575193553456421);
    r.exact_degree = 6;
  }
  return r;
}

}  // namespace detail

/// Quadrature on the reference element exact for polynomials of `requested_degree` (1..6).
inline QuadratureRule quadrature_for(ElementKind kind, int requested_degree) {
  if (requested_degree < 1 || requested_degree > 6)
    throw InvalidArgument("unsupported quadrature degree " + std::to_string(requested_degree) + " (expected 1..6)");
  if (kind == ElementKind::P1Tri) return detail::triangle_rule(requested_degree);

  const int n = (requested_degree + 2) / 2;  // smallest n with 2n - 1 >= degree
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  QuadratureRule r;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      r.points.push_back({x[i], x[j]});
      r.weights.push_back(w[i] * w[j]);
    }
  r.exact_degree = 2 * n - 1;
  return r;
}

using Mat2 = std::array<std::array<double, 2>, 2>;  ///< row-major, J[r][c] = d x_r / d xi_c

struct PhysicalMap {
  Point point;
  Mat2 jacobian{};
  double det = 0.0;
  Mat2 inverse_transpose{};  ///< J^{-T}, maps reference gradients to physical ones
};

/// Reference-to-physical map of a mesh cell. Vertex offsets are taken relative to
/// vertex 0 so that cells of width ~1e-17 near x = 1 keep full precision.
inline PhysicalMap map_to_physical(const ShishkinMesh& mesh, const Cell& cell, RefPoint ref) {
  const ElementKind kind = element_kind(cell);
  const Point& p0 = mesh.nodes[cell.vertex_ids[0]];
  const ShapeValues s = shape_eval(kind, ref);
  PhysicalMap m;
  double dx = 0.0, dy = 0.0;
  for (int k = 1; k < s.count; ++k) {
    const Point& pk = mesh.nodes[cell.vertex_ids[k]];
    const double ox = span(p0.x, pk.x), oy = span(p0.y, pk.y);
    dx += s.values[k] * ox;
    dy += s.values[k] * oy;
    m.jacobian[0][0] += ox * s.grads[k][0];
    m.jacobian[0][1] += ox * s.grads[k][1];
    m.jacobian[1][0] += oy * s.grads[k][0];
    m.jacobian[1][1] += oy * s.grads[k][1];
  }
  m.point = {p0.x.shifted(dx), p0.y.shifted(dy)};
  const Mat2& J = m.jacobian;
  m.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  if (!(m.det > 0.0))
    throw DegenerateCell("degenerate cell at grid rectangle (" + std::to_string(cell.grid_cell[0]) + "," +
                         std::to_string(cell.grid_cell[1]) + "): detJ = " + std::to_string(m.det));
  const double inv = 1.0 / m.det;
  m.inverse_transpose = {{{J[1][1] * inv, -J[1][0] * inv}, {-J[0][1] * inv, J[0][0] * inv}}};
  return m;
}

/// Shape values, physical gradients and the quadrature weight times detJ at one point.
struct ElementValues {
  Point point;
  double jxw = 0.0;
  int count = 0;
  std::array<double, 4> phi{};
  std::array<Vec2, 4> grad{};
};

/// Calls `fn(const ElementValues&)` at every quadrature point of `cell`.
template <class Fn>
void for_each_quadrature_point(const ShishkinMesh& mesh, const Cell& cell, const QuadratureRule& rule, Fn&& fn) {
  const ElementKind kind = element_kind(cell);
  ElementValues ev;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const ShapeValues s = shape_eval(kind, rule.points[q]);
    const PhysicalMap m = map_to_physical(mesh, cell, rule.points[q]);
    ev.point = m.point;
    ev.jxw = rule.weights[q] * m.det;
    ev.count = s.count;
    for (int k = 0; k < s.count; ++k) {
      ev.phi[k] = s.values[k];
      const Mat2& G = m.inverse_transpose;
      ev.grad[k] = {G[0][0] * s.grads[k][0] + G[0][1] * s.grads[k][1],
                    G[1][0] * s.grads[k][0] + G[1][1] * s.grads[k][1]};
    }
    fn(static_cast<const ElementValues&>(ev));
  }
}

/// Quadrature rules used for assembly and norms: exact for every bilinear-form
/// integrand when b is affine (degree 4 on triangles, 3x3 Gauss on quads).
struct AssemblyQuadrature {
  QuadratureRule triangle = quadrature_for(ElementKind::P1Tri, 4);
  QuadratureRule quad = quadrature_for(ElementKind::Q1Quad, 5);

  static AssemblyQuadrature with_degrees(int triangle_degree, int quad_degree) {
    return {quadrature_for(ElementKind::P1Tri, triangle_degree), quadrature_for(ElementKind::Q1Quad, quad_degree)};
  }

  const QuadratureRule& for_cell(const Cell& c) const { return c.kind == CellKind::Quad ? quad : triangle; }
};

}  // namespace layerfem
