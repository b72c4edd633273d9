#pragma once

#include <span>
#include <vector>

namespace fpr {

/// Row r reads lo[r] x[r-1] + di[r] x[r] + up[r] x[r+1] = rhs[r];
/// lo[0] and up[n-1] are ignored.
struct TridiagSystem {
  std::vector<double> lo, di, up;

  std::size_t size() const { return di.size(); }
  void resize(std::size_t n) {
    lo.assign(n, 0.0);
    di.assign(n, 0.0);
    up.assign(n, 0.0);
  }
};

bool diagonally_dominant(const TridiagSystem& sys);

/// Thomas elimination. Throws SolverBreakdown naming the row on a zero pivot.
std::vector<double> solve_thomas(const TridiagSystem& sys, std::span<const double> rhs);

/// Gaussian elimination with partial pivoting (row interchanges only, fill-in
/// of one extra super-diagonal). Throws SolverBreakdown on a singular matrix.
std::vector<double> solve_pivoting(const TridiagSystem& sys, std::span<const double> rhs);

/// Max-norm residual |A x - rhs| divided by max(1, |rhs|).
double relative_residual(const TridiagSystem& sys, std::span<const double> x,
                         std::span<const double> rhs);

/// Thomas when diagonally dominant, pivoting otherwise or when the Thomas
/// residual exceeds `tol`.
std::vector<double> solve_tridiagonal(const TridiagSystem& sys, std::span<const double> rhs,
                                      double tol = 1e-10);

}  // namespace fpr
