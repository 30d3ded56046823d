#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "layerfem/assembly.hpp"
#include "layerfem/fem_core.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/problems.hpp"

namespace layerfem {

/// A continuous piecewise P1/Q1 function given by its values at every mesh node.
struct FEFunction {
  const ShishkinMesh* mesh = nullptr;
  std::vector<double> coef;

  static FEFunction zero(const ShishkinMesh& mesh) { return {&mesh, std::vector<double>(mesh.node_count(), 0.0)}; }

  /// Extends a vector over interior DOFs by zero boundary values.
  static FEFunction from_dofs(const ShishkinMesh& mesh, const DofMap& dofs, std::span<const double> values) {
    FEFunction fe = zero(mesh);
    for (int d = 0; d < dofs.size(); ++d) fe.coef[dofs.dof_to_node[d]] = values[d];
    return fe;
  }

  std::vector<double> restrict_to(const DofMap& dofs) const {
    std::vector<double> out(dofs.size());
    for (int d = 0; d < dofs.size(); ++d) out[d] = coef[dofs.dof_to_node[d]];
    return out;
  }

  /// Value at a reference point of a cell.
  double evaluate(const Cell& cell, RefPoint ref) const {
    const ShapeValues s = shape_eval(element_kind(cell), ref);
    double v = 0.0;
    for (int k = 0; k < s.count; ++k) v += s.values[k] * coef[cell.vertex_ids[k]];
    return v;
  }
};

inline FEFunction operator-(const FEFunction& a, const FEFunction& b) {
  FEFunction d = a;
  for (std::size_t i = 0; i < d.coef.size(); ++i) d.coef[i] -= b.coef[i];
  return d;
}

/// Nodal interpolant; the same on P1 and Q1 cells.
inline FEFunction interpolate(const ShishkinMesh& mesh, const ExactSolution& exact) {
  FEFunction fe = FEFunction::zero(mesh);
  for (int id = 0; id < mesh.node_count(); ++id) fe.coef[id] = exact.value(mesh.nodes[id]);
  return fe;
}

/// Squared pieces of the SD norm; all integrals are quadrature-exact.
struct NormParts {
  double h1_semi_sq = 0.0;    ///< |v|_1^2
  double l2_sq = 0.0;         ///< ||v||^2
  double streamline_sq = 0.0;  ///< sum_K delta_K ||b v_x||_K^2

  double energy_sq(double eps, double mu0) const { return eps * h1_semi_sq + mu0 * l2_sq; }
  double sd_sq(double eps, double mu0) const { return energy_sq(eps, mu0) + streamline_sq; }
};

inline NormParts norm_parts(const FEFunction& fe, const Problem* problem, const StabilizationConfig& config,
                            const AssemblyQuadrature& quad = {}) {
  NormParts parts;
  const ShishkinMesh& mesh = *fe.mesh;
  for (const Cell& cell : mesh.cells) {
    const double delta = problem ? delta_for(config, cell.region) : 0.0;
    for_each_quadrature_point(mesh, cell, quad.for_cell(cell), [&](const ElementValues& ev) {
      double v = 0.0, vx = 0.0, vy = 0.0;
      for (int k = 0; k < ev.count; ++k) {
        const double ck = fe.coef[cell.vertex_ids[k]];
        v += ck * ev.phi[k];
        vx += ck * ev.grad[k][0];
        vy += ck * ev.grad[k][1];
      }
      parts.h1_semi_sq += ev.jxw * (vx * vx + vy * vy);
      parts.l2_sq += ev.jxw * v * v;
      if (delta != 0.0) {
        const double bvx = problem->b(ev.point) * vx;
        parts.streamline_sq += ev.jxw * delta * bvx * bvx;
      }
    });
  }
  return parts;
}

/// eps |v|_1^2 + mu0 ||v||^2
inline double energy_norm_sq(const FEFunction& fe, double eps, double mu0) {
  return norm_parts(fe, nullptr, {}).energy_sq(eps, mu0);
}

/// ||v||_eps^2 + sum_K delta_K ||b v_x||_K^2
inline double sd_norm_sq(const FEFunction& fe, const Problem& problem, const StabilizationConfig& config) {
  return norm_parts(fe, &problem, config).sd_sq(problem.eps, problem.mu0);
}

/// Sampled sup of |u - u^I| over the cells accepted by `include`, using
/// `samples_per_cell` uniformly random reference points per cell (plus the
/// cell's quadrature points). Deterministic for a given seed.
inline double sampled_interpolation_error(const ShishkinMesh& mesh, const ExactSolution& exact,
                                          const std::function<bool(const Cell&)>& include, int samples_per_cell = 10,
                                          unsigned seed = 1) {
  const FEFunction uI = interpolate(mesh, exact);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double sup = 0.0;
  const AssemblyQuadrature quad = AssemblyQuadrature::with_degrees(6, 6);
  for (const Cell& cell : mesh.cells) {
    if (!include(cell)) continue;
    std::vector<RefPoint> pts = quad.for_cell(cell).points;
    for (int s = 0; s < samples_per_cell; ++s) {
      double a = unit(rng), b = unit(rng);
      if (cell.kind == CellKind::Quad) {
        pts.push_back({2.0 * a - 1.0, 2.0 * b - 1.0});
      } else {
        if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
        pts.push_back({a, b});
      }
    }
    for (const RefPoint& ref : pts) {
      const PhysicalMap m = map_to_physical(mesh, cell, ref);
      sup = std::max(sup, std::abs(exact.value(m.point) - uI.evaluate(cell, ref)));
    }
  }
  return sup;
}

}  // namespace layerfem
