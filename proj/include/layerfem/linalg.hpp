#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "layerfem/error.hpp"

namespace layerfem {

/// Square sparse matrix in compressed sparse row format. Column indices are
/// sorted and unique within each row.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  int rows() const { return n; }
  std::size_t nonzeros() const { return val.size(); }

  /// Entry (r, c), or 0 when not stored.
  double at(int r, int c) const {
    const auto first = col.begin() + row_ptr[r], last = col.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
  }

  static SparseMatrix identity(int n) {
    SparseMatrix A;
    A.n = n;
    A.row_ptr.resize(n + 1);
    std::iota(A.row_ptr.begin(), A.row_ptr.end(), 0);
    A.col.resize(n);
    std::iota(A.col.begin(), A.col.end(), 0);
    A.val.assign(n, 1.0);
    return A;
  }

  static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense) {
    SparseMatrix A;
    A.n = static_cast<int>(dense.size());
    A.row_ptr.assign(1, 0);
    for (const auto& row : dense) {
      if (static_cast<int>(row.size()) != A.n) throw InvalidArgument("from_dense: matrix must be square");
      for (int c = 0; c < A.n; ++c)
        if (row[c] != 0.0) {
          A.col.push_back(c);
          A.val.push_back(row[c]);
        }
      A.row_ptr.push_back(static_cast<int>(A.col.size()));
    }
    return A;
  }
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Builds a CSR matrix from triplets, summing duplicates. Duplicates are summed
/// in their order of appearance, so the result is bitwise reproducible.
inline SparseMatrix from_triplets(int n, std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  SparseMatrix A;
  A.n = n;
  A.row_ptr.assign(n + 1, 0);
  int last_row = -1, last_col = -1;
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) throw InvalidArgument("triplet index out of range");
    if (t.row == last_row && t.col == last_col) {
      A.val.back() += t.value;
      continue;
    }
    A.col.push_back(t.col);
    A.val.push_back(t.value);
    A.row_ptr[t.row + 1] = static_cast<int>(A.col.size());
    last_row = t.row;
    last_col = t.col;
  }
  for (int r = 0; r < n; ++r) A.row_ptr[r + 1] = std::max(A.row_ptr[r + 1], A.row_ptr[r]);
  return A;
}

inline void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != A.n || static_cast<int>(y.size()) != A.n)
    throw InvalidArgument("spmv: dimension mismatch");
  for (int r = 0; r < A.n; ++r) {
    double sum = 0.0;
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) sum += A.val[k] * x[A.col[k]];
    y[r] = sum;
  }
}

inline std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x) {
  std::vector<double> y(A.n);
  spmv(A, x, y);
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// x^T A x
inline double quadratic_form(const SparseMatrix& A, std::span<const double> x) {
  return dot(x, spmv(A, x));
}

/// ||b - A x||_2 / ||b||_2, recomputed from scratch (||b|| = 0 gives the absolute residual).
inline double relative_residual(const SparseMatrix& A, std::span<const double> x, std::span<const double> b) {
  const std::vector<double> ax = spmv(A, x);
  double r2 = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) r2 += (b[i] - ax[i]) * (b[i] - ax[i]);
  const double bn = norm2(b);
  return bn > 0.0 ? std::sqrt(r2) / bn : std::sqrt(r2);
}

enum class PreconditionerKind { None, Jacobi, ILU0 };

inline std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::None: return "none";
    case PreconditionerKind::Jacobi: return "jacobi";
    case PreconditionerKind::ILU0: return "ilu0";
  }
  return "?";
}

inline PreconditionerKind parse_preconditioner(std::string_view s) {
  for (auto k : {PreconditionerKind::None, PreconditionerKind::Jacobi, PreconditionerKind::ILU0})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown preconditioner '" + std::string(s) + "' (expected none|jacobi|ilu0)");
}

/// Approximate inverse action M^{-1} for right preconditioning.
class Preconditioner {
 public:
  Preconditioner() = default;

  static Preconditioner build(const SparseMatrix& A, PreconditionerKind kind) {
    Preconditioner p;
    p.kind_ = kind;
    p.n_ = A.n;
    switch (kind) {
      case PreconditionerKind::None: break;
      case PreconditionerKind::Jacobi: {
        p.inv_diag_.resize(A.n);
        for (int r = 0; r < A.n; ++r) {
          const double d = A.at(r, r);
          if (d == 0.0) throw NumericalError("Jacobi preconditioner: zero diagonal in row " + std::to_string(r));
          p.inv_diag_[r] = 1.0 / d;
        }
        break;
      }
      case PreconditionerKind::ILU0: p.factor_ilu0(A); break;
    }
    return p;
  }

  PreconditionerKind kind() const { return kind_; }

  void apply(std::span<const double> in, std::span<double> out) const {
    switch (kind_) {
      case PreconditionerKind::None: std::copy(in.begin(), in.end(), out.begin()); return;
      case PreconditionerKind::Jacobi:
        for (int i = 0; i < n_; ++i) out[i] = inv_diag_[i] * in[i];
        return;
      case PreconditionerKind::ILU0: {
        // L has unit diagonal; forward then backward substitution.
        for (int i = 0; i < n_; ++i) {
          double s = in[i];
          for (int k = lu_.row_ptr[i]; k < diag_[i]; ++k) s -= lu_.val[k] * out[lu_.col[k]];
          out[i] = s;
        }
        for (int i = n_ - 1; i >= 0; --i) {
          double s = out[i];
          for (int k = diag_[i] + 1; k < lu_.row_ptr[i + 1]; ++k) s -= lu_.val[k] * out[lu_.col[k]];
          out[i] = s / lu_.val[diag_[i]];
        }
        return;
      }
    }
  }

 private:
  void factor_ilu0(const SparseMatrix& A) {
    lu_ = A;
    const int n = A.n;
    diag_.assign(n, -1);
    for (int i = 0; i < n; ++i)
      for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k)
        if (lu_.col[k] == i) diag_[i] = k;
    std::vector<int> pos(n, -1);
    for (int i = 0; i < n; ++i) {
      if (diag_[i] < 0) throw NumericalError("ILU0: zero pivot (missing diagonal) in row " + std::to_string(i));
      for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) pos[lu_.col[k]] = k;
      for (int k = lu_.row_ptr[i]; k < diag_[i]; ++k) {
        const int p = lu_.col[k];
        const double pivot = lu_.val[diag_[p]];
        const double l = lu_.val[k] / pivot;
        lu_.val[k] = l;
        for (int m = diag_[p] + 1; m < lu_.row_ptr[p + 1]; ++m) {
          const int q = pos[lu_.col[m]];
          if (q >= 0) lu_.val[q] -= l * lu_.val[m];
        }
      }
      if (lu_.val[diag_[i]] == 0.0 || !std::isfinite(lu_.val[diag_[i]]))
        throw NumericalError("ILU0: zero pivot in row " + std::to_string(i));
      for (int k = lu_.row_ptr[i]; k < lu_.row_ptr[i + 1]; ++k) pos[lu_.col[k]] = -1;
    }
  }

  PreconditionerKind kind_ = PreconditionerKind::None;
  int n_ = 0;
  std::vector<double> inv_diag_;
  SparseMatrix lu_;
  std::vector<int> diag_;
};

inline Preconditioner build_preconditioner(const SparseMatrix& A, PreconditionerKind kind) {
  return Preconditioner::build(A, kind);
}

struct SolveStats {
  int iterations = 0;
  int restarts = 0;
  double relative_residual = 0.0;  ///< true residual ||b - Ax|| / ||b||
  bool converged = false;
};

struct GmresOptions {
  int restart = 60;
  double tol = 1e-12;
  int max_outer = 200;
};

/// Restarted, right-preconditioned GMRES(m) with modified Gram-Schmidt and
/// Givens rotations. Convergence is declared on the recomputed true residual.
inline SolveStats gmres(const SparseMatrix& A, std::span<const double> b, std::span<double> x,
                        const Preconditioner& M, const GmresOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("gmres: tol must be positive");
  if (opt.restart < 1) throw InvalidArgument("gmres: restart must be >= 1");
  const int n = A.n;
  if (static_cast<int>(b.size()) != n || static_cast<int>(x.size()) != n)
    throw InvalidArgument("gmres: dimension mismatch");

  SolveStats stats;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return stats;
  }
  const int m = std::min(opt.restart, n);
  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
  auto h = [&](int i, int j) -> double& { return H[static_cast<std::size_t>(i) * m + j]; };
  std::vector<double> cs(m), sn(m), g(m + 1), y(m), z(n), w(n), r(n);

  auto true_residual = [&]() {
    spmv(A, x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r);
  };

  double rnorm = true_residual();
  std::vector<double> best_x(x.begin(), x.end());
  double best = rnorm;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    stats.relative_residual = rnorm / bnorm;
    if (stats.relative_residual <= opt.tol) {
      stats.converged = true;
      return stats;
    }
    if (outer > 0) stats.restarts++;
    for (int i = 0; i < n; ++i) V[0][i] = r[i] / rnorm;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = rnorm;
    int k = 0;
    for (; k < m; ++k) {
      M.apply(V[k], z);
      spmv(A, z, w);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = dot(w, V[i]);
        for (int t = 0; t < n; ++t) w[t] -= h(i, k) * V[i][t];
      }
      h(k + 1, k) = norm2(w);
      if (h(k + 1, k) > 0.0)
        for (int t = 0; t < n; ++t) V[k + 1][t] = w[t] / h(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double tmp = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = tmp;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      cs[k] = denom > 0.0 ? h(k, k) / denom : 1.0;
      sn[k] = denom > 0.0 ? h(k + 1, k) / denom : 0.0;
      h(k, k) = denom;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      stats.iterations++;
      // Stop the cycle a bit below tol so the recomputed residual passes.
      if (std::abs(g[k + 1]) <= 0.5 * opt.tol * bnorm || h(k, k) == 0.0) {
        ++k;
        break;
      }
    }
    // Back substitution for y, then x += M^{-1} V y.
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h(i, j) * y[j];
      y[i] = h(i, i) != 0.0 ? s / h(i, i) : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j)
      for (int t = 0; t < n; ++t) w[t] += y[j] * V[j][t];
    M.apply(w, z);
    for (int t = 0; t < n; ++t) x[t] += z[t];
    rnorm = true_residual();
    if (rnorm < best) {
      best = rnorm;
      std::copy(x.begin(), x.end(), best_x.begin());
    }
  }
  stats.relative_residual = rnorm / bnorm;
  if (stats.relative_residual <= opt.tol) {
    stats.converged = true;
    return stats;
  }
  std::copy(best_x.begin(), best_x.end(), x.begin());
  stats.relative_residual = best / bnorm;
  return stats;
}

/// MatrixMarket coordinate (real general) dump, 1-based indices.
inline void write_matrix_market(std::ostream& os, const SparseMatrix& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.n << ' ' << A.n << ' ' << A.nonzeros() << '\n';
  os.precision(17);
  for (int r = 0; r < A.n; ++r)
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) os << r + 1 << ' ' << A.col[k] + 1 << ' ' << A.val[k] << '\n';
}

}  // namespace layerfem
