#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "layerfem/error.hpp"
#include "layerfem/fem_core.hpp"
#include "layerfem/linalg.hpp"
#include "layerfem/mesh.hpp"
#include "layerfem/problems.hpp"

namespace layerfem {

/// Streamline-diffusion weights, constant on each of the four mesh regions.
struct StabilizationConfig {
  double delta_s = 0.0;
  double delta_x = 0.0;
  double delta_y = 0.0;
  double delta_xy = 0.0;
};

inline double delta_for(const StabilizationConfig& config, RegionTag tag) {
  switch (tag) {
    case RegionTag::Omega_s: return config.delta_s;
    case RegionTag::Omega_x: return config.delta_x;
    case RegionTag::Omega_y: return config.delta_y;
    case RegionTag::Omega_xy: return config.delta_xy;
  }
  return 0.0;
}

/// Per-region sup of |c|, sampled at cell vertices and assembly quadrature points.
inline std::array<double, 4> sampled_sup_c(const ShishkinMesh& mesh, const Problem& problem) {
  std::array<double, 4> sup{};
  const AssemblyQuadrature quad;
  for (const Cell& cell : mesh.cells) {
    double& s = sup[region_index(cell.region)];
    for (int k = 0; k < cell.vertex_count(); ++k) s = std::max(s, std::abs(problem.c(mesh.nodes[cell.vertex_ids[k]])));
    for_each_quadrature_point(mesh, cell, quad.for_cell(cell),
                              [&](const ElementValues& ev) { s = std::max(s, std::abs(problem.c(ev.point))); });
  }
  return sup;
}

/// Upper bounds mu0 / (2 sup|c|^2) per region.
inline std::array<double, 4> delta_bounds(const ShishkinMesh& mesh, const Problem& problem) {
  const auto sup = sampled_sup_c(mesh, problem);
  std::array<double, 4> bound{};
  for (int r = 0; r < 4; ++r)
    bound[r] = sup[r] > 0.0 ? problem.mu0 / (2.0 * sup[r] * sup[r]) : std::numeric_limits<double>::infinity();
  return bound;
}

/// Throws StabilizationBoundError unless 0 <= delta <= mu0 / (2 ||c||^2) in every region.
inline void validate_stabilization(const StabilizationConfig& config, const ShishkinMesh& mesh,
                                   const Problem& problem) {
  const auto bound = delta_bounds(mesh, problem);
  for (RegionTag tag : kAllRegions) {
    const double d = delta_for(config, tag);
    if (!(d >= 0.0) || !std::isfinite(d))
      throw StabilizationBoundError("delta_" + std::string(to_string(tag)) + " must be finite and nonnegative");
    if (d > bound[region_index(tag)]) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "delta_" << to_string(tag) << " = " << d << " violates the coercivity bound delta <= mu0/(2|c|^2) = "
          << bound[region_index(tag)];
      throw StabilizationBoundError(msg.str());
    }
  }
}

struct LocalMatrix {
  int n = 0;
  std::array<std::array<double, 4>, 4> a{};  ///< a[r][s]: test function r, trial function s
};

struct LocalVector {
  int n = 0;
  std::array<double, 4> v{};
};

/// (r, s) entry: int_K eps grad(phi_s).grad(phi_r) + (b phi_s,x + c phi_s)(phi_r + delta b phi_r,x).
/// The -eps Laplace term of the residual vanishes for P1 and for Q1 on axis-aligned cells.
inline LocalMatrix local_matrix(const ShishkinMesh& mesh, const Cell& cell, const Problem& problem, double delta,
                                const AssemblyQuadrature& quad = {}) {
  LocalMatrix lm;
  lm.n = cell.vertex_count();
  const double eps = problem.eps;
  for_each_quadrature_point(mesh, cell, quad.for_cell(cell), [&](const ElementValues& ev) {
    const double b = problem.b(ev.point);
    const double c = problem.c(ev.point);
    for (int r = 0; r < ev.count; ++r) {
      const double test = ev.phi[r] + delta * b * ev.grad[r][0];
      for (int s = 0; s < ev.count; ++s) {
        const double diffusion = eps * (ev.grad[s][0] * ev.grad[r][0] + ev.grad[s][1] * ev.grad[r][1]);
        const double reaction = b * ev.grad[s][0] + c * ev.phi[s];
        lm.a[r][s] += ev.jxw * (diffusion + reaction * test);
      }
    }
  });
  return lm;
}

/// r entry: int_K f (phi_r + delta b phi_r,x).
inline LocalVector local_rhs(const ShishkinMesh& mesh, const Cell& cell, const Problem& problem, double delta,
                             const AssemblyQuadrature& quad = {}) {
  LocalVector lv;
  lv.n = cell.vertex_count();
  for_each_quadrature_point(mesh, cell, quad.for_cell(cell), [&](const ElementValues& ev) {
    const double f = problem.f(ev.point);
    if (!std::isfinite(f)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "non-finite source value at (" << ev.point.x.value << ", " << ev.point.y.value << ")";
      throw NumericalError(msg.str());
    }
    const double b = problem.b(ev.point);
    for (int r = 0; r < ev.count; ++r) lv.v[r] += ev.jxw * f * (ev.phi[r] + delta * b * ev.grad[r][0]);
  });
  return lv;
}

/// Interior nodes numbered lexicographically; boundary nodes map to -1.
struct DofMap {
  std::vector<int> node_to_dof;
  std::vector<int> dof_to_node;

  static DofMap interior(const ShishkinMesh& mesh) {
    DofMap map;
    map.node_to_dof.assign(mesh.node_count(), -1);
    for (int id = 0; id < mesh.node_count(); ++id)
      if (!mesh.on_boundary[id]) {
        map.node_to_dof[id] = static_cast<int>(map.dof_to_node.size());
        map.dof_to_node.push_back(id);
      }
    return map;
  }

  int size() const { return static_cast<int>(dof_to_node.size()); }
};

struct DiscreteSystem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  DofMap dofs;
  std::vector<int> eliminated;  ///< boundary node ids (homogeneous Dirichlet)
};

struct AssemblyOptions {
  AssemblyQuadrature quadrature{};
  int jobs = 1;  ///< worker threads for local computations; output is identical for any value
};

namespace detail {

/// Runs `fn(begin, end)` over [0, count) split into `jobs` contiguous chunks.
template <class Fn>
void parallel_chunks(int count, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, std::max(1, count));
  if (jobs == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    const int chunk = (count + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
      const int begin = t * chunk, end = std::min(count, begin + chunk);
      if (begin < end)
        workers.emplace_back([&fn, &errors, t, begin, end] {
          try {
            fn(begin, end);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Scatters per-cell local blocks into a CSR matrix over interior DOFs, in cell order.
inline SparseMatrix scatter(const ShishkinMesh& mesh, const DofMap& dofs, const std::vector<LocalMatrix>& blocks) {
  std::vector<Triplet> triplets;
  triplets.reserve(blocks.size() * 16);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    const LocalMatrix& lm = blocks[c];
    for (int r = 0; r < lm.n; ++r) {
      const int row = dofs.node_to_dof[cell.vertex_ids[r]];
      if (row < 0) continue;
      for (int s = 0; s < lm.n; ++s) {
        const int col = dofs.node_to_dof[cell.vertex_ids[s]];
        if (col >= 0) triplets.push_back({row, col, lm.a[r][s]});
      }
    }
  }
  return from_triplets(dofs.size(), std::move(triplets));
}

}  // namespace detail

/// Assembles the stabilized system with boundary DOFs eliminated. Local blocks
/// may be computed in parallel; accumulation is serial in cell order.
inline DiscreteSystem assemble(const ShishkinMesh& mesh, const Problem& problem, const StabilizationConfig& config,
                               const AssemblyOptions& options = {}) {
  validate_stabilization(config, mesh, problem);
  DiscreteSystem sys;
  sys.dofs = DofMap::interior(mesh);
  sys.eliminated = mesh.boundary_node_ids;

  const int ncells = mesh.cell_count();
  std::vector<LocalMatrix> blocks(ncells);
  std::vector<LocalVector> loads(ncells);
  detail::parallel_chunks(ncells, options.jobs, [&](int begin, int end) {
    for (int c = begin; c < end; ++c) {
      const Cell& cell = mesh.cells[c];
      const double delta = delta_for(config, cell.region);
      blocks[c] = local_matrix(mesh, cell, problem, delta, options.quadrature);
      loads[c] = local_rhs(mesh, cell, problem, delta, options.quadrature);
    }
  });

  sys.matrix = detail::scatter(mesh, sys.dofs, blocks);
  sys.rhs.assign(sys.dofs.size(), 0.0);
  for (int c = 0; c < ncells; ++c) {
    const Cell& cell = mesh.cells[c];
    for (int r = 0; r < loads[c].n; ++r) {
      const int row = sys.dofs.node_to_dof[cell.vertex_ids[r]];
      if (row >= 0) sys.rhs[row] += loads[c].v[r];
    }
  }
  return sys;
}

/// The three symmetric blocks whose quadratic forms make up the SD norm:
///   ||v||_SD^2 = eps v'Kv + mu0 v'Mv + v'Sv,
/// with K the stiffness matrix, M the mass matrix and S the weighted
/// streamline matrix sum_K delta_K int b^2 phi_s,x phi_r,x.
struct NormMatrices {
  SparseMatrix stiffness;
  SparseMatrix mass;
  SparseMatrix streamline;
};

inline NormMatrices assemble_norm_matrices(const ShishkinMesh& mesh, const Problem& problem,
                                           const StabilizationConfig& config, const AssemblyQuadrature& quad = {}) {
  const DofMap dofs = DofMap::interior(mesh);
  const int ncells = mesh.cell_count();
  std::vector<LocalMatrix> k(ncells), m(ncells), s(ncells);
  for (int c = 0; c < ncells; ++c) {
    const Cell& cell = mesh.cells[c];
    const double delta = delta_for(config, cell.region);
    k[c].n = m[c].n = s[c].n = cell.vertex_count();
    for_each_quadrature_point(mesh, cell, quad.for_cell(cell), [&](const ElementValues& ev) {
      const double b = problem.b(ev.point);
      for (int r = 0; r < ev.count; ++r)
        for (int q = 0; q < ev.count; ++q) {
          k[c].a[r][q] += ev.jxw * (ev.grad[r][0] * ev.grad[q][0] + ev.grad[r][1] * ev.grad[q][1]);
          m[c].a[r][q] += ev.jxw * ev.phi[r] * ev.phi[q];
          s[c].a[r][q] += ev.jxw * delta * b * b * ev.grad[r][0] * ev.grad[q][0];
        }
    });
  }
  return {detail::scatter(mesh, dofs, k), detail::scatter(mesh, dofs, m), detail::scatter(mesh, dofs, s)};
}

}  // namespace layerfem
