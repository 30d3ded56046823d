#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "layerfem/coordinate.hpp"
#include "layerfem/error.hpp"

namespace layerfem {

struct MeshParams {
  int N = 12;
  double eps = 1e-6;
  double beta = 1.0;
  double rho = 2.5;

  /// Throws InvalidArgument on a violated invariant.
  void validate() const {
    if (N < 6 || N % 6 != 0) throw InvalidArgument("N must be divisible by 6 (got " + std::to_string(N) + ")");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("rho must be positive");
  }

  /// True when eps > min{1/N, ln^-6 N}, the regime the layer analysis does not cover.
  bool eps_assumption_violated() const {
    const double lnN = std::log(static_cast<double>(N));
    return eps > std::min(1.0 / N, std::pow(lnN, -6.0));
  }
};

struct TransitionParams {
  double lambda_x = 0.5;
  double lambda_y = 0.25;
  bool capped_x = true;
  bool capped_y = true;
};

inline TransitionParams compute_transition_params(const MeshParams& params) {
  params.validate();
  const double lnN = std::log(static_cast<double>(params.N));
  const double raw_x = params.rho * (params.eps / params.beta) * lnN;
  const double raw_y = params.rho * std::sqrt(params.eps) * lnN;
  TransitionParams t;
  t.capped_x = !(raw_x < 0.5);
  t.capped_y = !(raw_y < 0.25);
  t.lambda_x = t.capped_x ? 0.5 : raw_x;
  t.lambda_y = t.capped_y ? 0.25 : raw_y;
  return t;
}

/// Piecewise uniform 1D grid on [0,1].
struct Grid1D {
  std::vector<Coordinate> coords;
  std::vector<double> widths;       ///< widths[i] = coords[i+1] - coords[i], from the band formula
  std::vector<int> band_boundaries;  ///< indices where the spacing switches (includes 0 and the last index)

  int intervals() const { return static_cast<int>(widths.size()); }
};

/// x-grid: N/2 coarse intervals on [0, 1-lambda_x], N/2 fine ones on [1-lambda_x, 1].
/// y-grid: fine on [0, lambda_y], coarse in the middle, fine on [1-lambda_y, 1].
inline std::pair<Grid1D, Grid1D> build_grid(const MeshParams& params, const TransitionParams& t) {
  params.validate();
  const int N = params.N;
  const double Nd = static_cast<double>(N);

  Grid1D gx;
  const int half = N / 2;
  const double H_x = 2.0 * (1.0 - t.lambda_x) / Nd;
  const double h_x = 2.0 * t.lambda_x / Nd;
  gx.coords.resize(N + 1);
  gx.widths.resize(N);
  for (int i = 0; i < half; ++i) {
    gx.coords[i] = {2.0 * i * (1.0 - t.lambda_x) / Nd, t.lambda_x + (half - i) * H_x};
    gx.widths[i] = H_x;
  }
  gx.coords[half] = {1.0 - t.lambda_x, t.lambda_x};
  for (int i = half + 1; i <= N; ++i) gx.coords[i] = Coordinate::from_complement(2.0 * (N - i) * t.lambda_x / Nd);
  for (int i = half; i < N; ++i) gx.widths[i] = h_x;
  gx.coords[0] = {0.0, 1.0};
  gx.coords[N] = {1.0, 0.0};
  gx.band_boundaries = {0, half, N};

  Grid1D gy;
  const int third = N / 3;
  const double h_y = 3.0 * t.lambda_y / Nd;
  const double H_y = 3.0 * (1.0 - 2.0 * t.lambda_y) / Nd;
  gy.coords.resize(N + 1);
  gy.widths.resize(N);
  for (int j = 0; j < third; ++j) gy.coords[j] = Coordinate::from_value(3.0 * j * t.lambda_y / Nd);
  gy.coords[third] = {t.lambda_y, 1.0 - t.lambda_y};
  for (int j = third + 1; j < 2 * third; ++j)
    gy.coords[j] = {t.lambda_y + (j - third) * H_y, t.lambda_y + (2 * third - j) * H_y};
  gy.coords[2 * third] = {1.0 - t.lambda_y, t.lambda_y};
  for (int j = 2 * third + 1; j <= N; ++j) gy.coords[j] = Coordinate::from_complement(3.0 * (N - j) * t.lambda_y / Nd);
  gy.coords[0] = {0.0, 1.0};
  gy.coords[N] = {1.0, 0.0};
  for (int j = 0; j < N; ++j) gy.widths[j] = (j < third || j >= 2 * third) ? h_y : H_y;
  gy.band_boundaries = {0, third, 2 * third, N};

  return {std::move(gx), std::move(gy)};
}

enum class RegionTag : std::uint8_t { Omega_s, Omega_x, Omega_y, Omega_xy };
enum class CellKind : std::uint8_t { TriK1, TriK2, Quad };
enum class Layout : std::uint8_t { Triangular, Rectangular, HybridI, HybridII };

inline constexpr std::array<RegionTag, 4> kAllRegions{RegionTag::Omega_s, RegionTag::Omega_x, RegionTag::Omega_y,
                                                      RegionTag::Omega_xy};
inline constexpr std::array<Layout, 4> kAllLayouts{Layout::Triangular, Layout::Rectangular, Layout::HybridI,
                                                   Layout::HybridII};

inline std::string_view to_string(RegionTag r) {
  switch (r) {
    case RegionTag::Omega_s: return "s";
    case RegionTag::Omega_x: return "x";
    case RegionTag::Omega_y: return "y";
    case RegionTag::Omega_xy: return "xy";
  }
  return "?";
}

inline std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::TriK1: return "tri1";
    case CellKind::TriK2: return "tri2";
    case CellKind::Quad: return "quad";
  }
  return "?";
}

inline std::string_view to_string(Layout l) {
  switch (l) {
    case Layout::Triangular: return "triangular";
    case Layout::Rectangular: return "rectangular";
    case Layout::HybridI: return "hybrid1";
    case Layout::HybridII: return "hybrid2";
  }
  return "?";
}

inline Layout parse_layout(std::string_view s) {
  for (Layout l : kAllLayouts)
    if (to_string(l) == s) return l;
  throw InvalidArgument("unknown layout '" + std::string(s) + "' (expected triangular|rectangular|hybrid1|hybrid2)");
}

inline constexpr int region_index(RegionTag r) { return static_cast<int>(r); }

struct Cell {
  CellKind kind = CellKind::Quad;
  std::array<int, 4> vertex_ids{};
  RegionTag region = RegionTag::Omega_s;
  std::array<int, 2> grid_cell{};  ///< (i, j) of the parent rectangle

  int vertex_count() const { return kind == CellKind::Quad ? 4 : 3; }
};

struct ShishkinMesh {
  MeshParams params;
  TransitionParams transition;
  Layout layout = Layout::Triangular;
  Grid1D grid_x;
  Grid1D grid_y;
  std::vector<Point> nodes;  ///< lexicographic: node (i, j) has index j * (N + 1) + i
  std::vector<Cell> cells;
  std::vector<int> boundary_node_ids;  ///< sorted
  std::vector<bool> on_boundary;

  int N() const { return params.N; }
  int node_index(int i, int j) const { return j * (params.N + 1) + i; }
  int node_count() const { return static_cast<int>(nodes.size()); }
  int cell_count() const { return static_cast<int>(cells.size()); }
};

/// Region of grid rectangle (i, j).
inline RegionTag region_of_rectangle(int N, int i, int j) {
  const bool layer_x = i >= N / 2;
  const bool layer_y = j < N / 3 || j >= 2 * N / 3;
  if (layer_x) return layer_y ? RegionTag::Omega_xy : RegionTag::Omega_x;
  return layer_y ? RegionTag::Omega_y : RegionTag::Omega_s;
}

inline bool rectangle_is_quad(Layout layout, RegionTag region) {
  switch (layout) {
    case Layout::Triangular: return false;
    case Layout::Rectangular: return true;
    case Layout::HybridI: return region == RegionTag::Omega_x;
    case Layout::HybridII: return region != RegionTag::Omega_x;
  }
  return false;
}

inline ShishkinMesh build_mesh(const MeshParams& params, Layout layout) {
  ShishkinMesh mesh;
  mesh.params = params;
  mesh.transition = compute_transition_params(params);
  mesh.layout = layout;
  std::tie(mesh.grid_x, mesh.grid_y) = build_grid(params, mesh.transition);

  const int N = params.N;
  mesh.nodes.reserve(static_cast<std::size_t>(N + 1) * (N + 1));
  mesh.on_boundary.assign(static_cast<std::size_t>(N + 1) * (N + 1), false);
  for (int j = 0; j <= N; ++j) {
    for (int i = 0; i <= N; ++i) {
      mesh.nodes.push_back({mesh.grid_x.coords[i], mesh.grid_y.coords[j]});
      if (i == 0 || i == N || j == 0 || j == N) {
        mesh.boundary_node_ids.push_back(mesh.node_index(i, j));
        mesh.on_boundary[mesh.node_index(i, j)] = true;
      }
    }
  }

  mesh.cells.reserve(static_cast<std::size_t>(2) * N * N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const RegionTag region = region_of_rectangle(N, i, j);
      const int v00 = mesh.node_index(i, j);
      const int v10 = mesh.node_index(i + 1, j);
      const int v01 = mesh.node_index(i, j + 1);
      const int v11 = mesh.node_index(i + 1, j + 1);
      if (rectangle_is_quad(layout, region)) {
        mesh.cells.push_back({CellKind::Quad, {v00, v10, v11, v01}, region, {i, j}});
      } else {
        mesh.cells.push_back({CellKind::TriK1, {v00, v10, v01, -1}, region, {i, j}});
        mesh.cells.push_back({CellKind::TriK2, {v01, v10, v11, -1}, region, {i, j}});
      }
    }
  }
  return mesh;
}

/// Signed area via the shoelace formula on vertex offsets from vertex 0.
inline double signed_area(const ShishkinMesh& mesh, const Cell& cell) {
  const Point& p0 = mesh.nodes[cell.vertex_ids[0]];
  double twice = 0.0;
  const int n = cell.vertex_count();
  for (int k = 0; k < n; ++k) {
    const Point& a = mesh.nodes[cell.vertex_ids[k]];
    const Point& b = mesh.nodes[cell.vertex_ids[(k + 1) % n]];
    const double ax = span(p0.x, a.x), ay = span(p0.y, a.y);
    const double bx = span(p0.x, b.x), by = span(p0.y, b.y);
    twice += ax * by - bx * ay;
  }
  return 0.5 * twice;
}

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;
  std::array<int, 4> region_cell_counts{};
  std::array<double, 4> region_areas{};
  int quad_count = 0;
  int triangle_count = 0;
  double total_area = 0.0;
  bool eps_assumption_violated = false;
  bool capped_x = false;
  bool capped_y = false;

  void fail(std::string msg) {
    ok = false;
    failures.push_back(std::move(msg));
  }
};

inline ValidationReport validate_mesh(const ShishkinMesh& mesh) {
  ValidationReport report;
  const int N = mesh.N();
  report.eps_assumption_violated = mesh.params.eps_assumption_violated();
  report.capped_x = mesh.transition.capped_x;
  report.capped_y = mesh.transition.capped_y;

  for (const Grid1D* g : {&mesh.grid_x, &mesh.grid_y}) {
    const char* name = g == &mesh.grid_x ? "x" : "y";
    if (g->coords.front().value != 0.0 || g->coords.back().value != 1.0)
      report.fail(std::string(name) + "-grid endpoints are not 0 and 1");
    for (std::size_t k = 0; k + 1 < g->coords.size(); ++k)
      if (!strictly_less(g->coords[k], g->coords[k + 1]))
        report.fail(std::string(name) + "-grid not strictly increasing at index " + std::to_string(k));
  }

  if (mesh.node_count() != (N + 1) * (N + 1)) report.fail("node count is not (N+1)^2");

  // Every edge must belong to two cells unless it lies on the boundary of the square.
  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const double area = signed_area(mesh, cell);
    if (!(area > 0.0)) report.fail("cell " + std::to_string(c) + " has nonpositive signed area");
    report.total_area += area;
    report.region_cell_counts[region_index(cell.region)]++;
    report.region_areas[region_index(cell.region)] += area;
    (cell.kind == CellKind::Quad ? report.quad_count : report.triangle_count)++;
    const int n = cell.vertex_count();
    for (int k = 0; k < n; ++k) {
      int a = cell.vertex_ids[k], b = cell.vertex_ids[(k + 1) % n];
      if (a > b) std::swap(a, b);
      edge_use[{a, b}]++;
    }
  }
  auto on_same_side = [&](int a, int b) {
    const int ia = a % (N + 1), ja = a / (N + 1), ib = b % (N + 1), jb = b / (N + 1);
    return (ia == ib && (ia == 0 || ia == N)) || (ja == jb && (ja == 0 || ja == N));
  };
  for (const auto& [edge, uses] : edge_use) {
    const bool boundary = on_same_side(edge.first, edge.second);
    if (uses != (boundary ? 1 : 2))
      report.fail("edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) + ") used by " +
                  std::to_string(uses) + " cells");
  }

  if (std::abs(report.total_area - 1.0) > 1e-12)
    report.fail("total area " + std::to_string(report.total_area) + " differs from 1");

  std::vector<int> expected_boundary;
  for (int id = 0; id < mesh.node_count(); ++id) {
    const int i = id % (N + 1), j = id / (N + 1);
    if (i == 0 || i == N || j == 0 || j == N) expected_boundary.push_back(id);
  }
  if (expected_boundary != mesh.boundary_node_ids) report.fail("boundary node set incomplete");
  return report;
}

}  // namespace layerfem
