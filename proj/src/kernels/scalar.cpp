#include <cmath>

#include "fpr/kernels.hpp"

namespace fpr::kernels::detail {

namespace {
inline bool bad_pivot(double m) { return !(std::abs(m) > 1e-300) || !std::isfinite(m); }
}  // namespace

void tridiag_apply_columns(std::size_t n_rows, std::size_t s_begin, std::size_t s_end,
                           std::size_t stride, const double* lo, const double* di,
                           const double* up, const double* x, double* y) {
  for (std::size_t r = 1; r + 1 < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = s_begin; s < s_end; ++s) {
      const std::size_t i = o + s;
      y[i] = lo[i] * x[i - stride] + di[i] * x[i] + up[i] * x[i + stride];
    }
  }
}

bool tridiag_solve_columns(std::size_t n_rows, std::size_t s_begin, std::size_t s_end,
                           std::size_t stride, const double* lo, const double* di,
                           const double* up, double* rhs, double* scratch,
                           std::size_t* bad_row) {
  for (std::size_t s = s_begin; s < s_end; ++s) {
    if (bad_pivot(di[s])) {
      if (bad_row) *bad_row = 0;
      return false;
    }
    scratch[s] = up[s] / di[s];
    rhs[s] = rhs[s] / di[s];
  }
  for (std::size_t r = 1; r < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = s_begin; s < s_end; ++s) {
      const std::size_t i = o + s;
      const double m = di[i] - lo[i] * scratch[i - stride];
      if (bad_pivot(m)) {
        if (bad_row) *bad_row = r;
        return false;
      }
      scratch[i] = up[i] / m;
      rhs[i] = (rhs[i] - lo[i] * rhs[i - stride]) / m;
    }
  }
  for (std::size_t r = n_rows - 1; r-- > 0;) {
    const std::size_t o = r * stride;
    for (std::size_t s = s_begin; s < s_end; ++s) {
      const std::size_t i = o + s;
      rhs[i] = rhs[i] - scratch[i] * rhs[i + stride];
    }
  }
  return true;
}

void tridiag_apply_scalar(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                          const double* lo, const double* di, const double* up,
                          const double* x, double* y) {
  tridiag_apply_columns(n_rows, 0, n_sys, stride, lo, di, up, x, y);
}

bool tridiag_solve_scalar(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                          const double* lo, const double* di, const double* up, double* rhs,
                          double* scratch, std::size_t* bad_row) {
  return tridiag_solve_columns(n_rows, 0, n_sys, stride, lo, di, up, rhs, scratch, bad_row);
}

}  // namespace fpr::kernels::detail
