#include "fpr/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpr/errors.hpp"

namespace fpr {

namespace {

void check_sizes(const TridiagSystem& sys, std::span<const double> rhs) {
  const std::size_t n = sys.size();
  if (n == 0 || sys.lo.size() != n || sys.up.size() != n || rhs.size() != n) {
    fail(ErrorKind::InvalidInput, "tridiagonal system has inconsistent sizes");
  }
}

[[noreturn]] void breakdown(std::size_t row) {
  fail(ErrorKind::SolverBreakdown, "zero pivot in tridiagonal elimination at row " +
                                       std::to_string(row));
}

}  // namespace

bool diagonally_dominant(const TridiagSystem& sys) {
  const std::size_t n = sys.size();
  for (std::size_t r = 0; r < n; ++r) {
    const double off = (r > 0 ? std::abs(sys.lo[r]) : 0.0) +
                       (r + 1 < n ? std::abs(sys.up[r]) : 0.0);
    if (!(std::abs(sys.di[r]) >= off)) return false;
  }
  return true;
}

std::vector<double> solve_thomas(const TridiagSystem& sys, std::span<const double> rhs) {
  check_sizes(sys, rhs);
  const std::size_t n = sys.size();
  std::vector<double> cp(n), x(n);
  double m = sys.di[0];
  if (!(std::abs(m) > 1e-300) || !std::isfinite(m)) breakdown(0);
  cp[0] = sys.up[0] / m;
  x[0] = rhs[0] / m;
  for (std::size_t r = 1; r < n; ++r) {
    m = sys.di[r] - sys.lo[r] * cp[r - 1];
    if (!(std::abs(m) > 1e-300) || !std::isfinite(m)) breakdown(r);
    cp[r] = sys.up[r] / m;
    x[r] = (rhs[r] - sys.lo[r] * x[r - 1]) / m;
  }
  for (std::size_t r = n - 1; r-- > 0;) x[r] -= cp[r] * x[r + 1];
  return x;
}

std::vector<double> solve_pivoting(const TridiagSystem& sys, std::span<const double> rhs) {
  check_sizes(sys, rhs);
  const std::size_t n = sys.size();
  // dl[i] is the sub-diagonal entry below d[i]; after elimination it holds
  // the second super-diagonal created by row swaps.
  std::vector<double> d = sys.di, du(n, 0.0), dl(n, 0.0), b(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    du[i] = sys.up[i];
    dl[i] = sys.lo[i + 1];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) breakdown(i);
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
      dl[i] = 0.0;
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - fact * tmp;
      if (i + 2 < n) {
        dl[i] = du[i + 1];
        du[i + 1] = -fact * dl[i];
      } else {
        dl[i] = 0.0;
      }
      du[i] = tmp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  if (d[n - 1] == 0.0 || !std::isfinite(d[n - 1])) breakdown(n - 1);
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t i = n >= 2 ? n - 2 : 0; i-- > 0;) {
    b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
  }
  return b;
}

double relative_residual(const TridiagSystem& sys, std::span<const double> x,
                         std::span<const double> rhs) {
  const std::size_t n = sys.size();
  double worst = 0.0, scale = 1.0;
  for (std::size_t r = 0; r < n; ++r) {
    double ax = sys.di[r] * x[r];
    if (r > 0) ax += sys.lo[r] * x[r - 1];
    if (r + 1 < n) ax += sys.up[r] * x[r + 1];
    worst = std::max(worst, std::abs(ax - rhs[r]));
    scale = std::max(scale, std::abs(rhs[r]));
  }
  return worst / scale;
}

std::vector<double> solve_tridiagonal(const TridiagSystem& sys, std::span<const double> rhs,
                                      double tol) {
  if (diagonally_dominant(sys)) {
    try {
      auto x = solve_thomas(sys, rhs);
      if (relative_residual(sys, x, rhs) <= tol) return x;
    } catch (const Error&) {
      // fall through to pivoting
    }
  }
  auto x = solve_pivoting(sys, rhs);
  const double res = relative_residual(sys, x, rhs);
  if (!(res <= tol)) {
    fail(ErrorKind::SolverBreakdown,
         "tridiagonal residual " + std::to_string(res) + " exceeds tolerance");
  }
  return x;
}

}  // namespace fpr
