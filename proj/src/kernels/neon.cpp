#include <arm_neon.h>

#include <cmath>

#include "fpr/kernels.hpp"

namespace fpr::kernels::detail {

namespace {
inline bool any_bad(float64x2_t m) {
  const float64x2_t a = vabsq_f64(m);
  const uint64x2_t ok = vandq_u64(vcgtq_f64(a, vdupq_n_f64(1e-300)),
                                  vcleq_f64(a, vdupq_n_f64(1.7976931348623157e308)));
  return (vgetq_lane_u64(ok, 0) & vgetq_lane_u64(ok, 1)) == 0;
}
}  // namespace

void tridiag_apply_neon(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                        const double* lo, const double* di, const double* up, const double* x,
                        double* y) {
  const std::size_t vec_end = n_sys / 2 * 2;
  for (std::size_t r = 1; r + 1 < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t a = vmulq_f64(vld1q_f64(lo + i), vld1q_f64(x + i - stride));
      const float64x2_t b = vmulq_f64(vld1q_f64(di + i), vld1q_f64(x + i));
      const float64x2_t c = vmulq_f64(vld1q_f64(up + i), vld1q_f64(x + i + stride));
      vst1q_f64(y + i, vaddq_f64(vaddq_f64(a, b), c));
    }
  }
  tridiag_apply_columns(n_rows, vec_end, n_sys, stride, lo, di, up, x, y);
}

bool tridiag_solve_neon(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                        const double* lo, const double* di, const double* up, double* rhs,
                        double* scratch, std::size_t* bad_row) {
  const std::size_t vec_end = n_sys / 2 * 2;
  for (std::size_t s = 0; s < vec_end; s += 2) {
    const float64x2_t d = vld1q_f64(di + s);
    if (any_bad(d)) {
      if (bad_row) *bad_row = 0;
      return false;
    }
    vst1q_f64(scratch + s, vdivq_f64(vld1q_f64(up + s), d));
    vst1q_f64(rhs + s, vdivq_f64(vld1q_f64(rhs + s), d));
  }
  for (std::size_t r = 1; r < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 2) {
      const std::size_t i = o + s;
      const float64x2_t l = vld1q_f64(lo + i);
      const float64x2_t m = vsubq_f64(vld1q_f64(di + i), vmulq_f64(l, vld1q_f64(scratch + i - stride)));
      if (any_bad(m)) {
        if (bad_row) *bad_row = r;
        return false;
      }
      vst1q_f64(scratch + i, vdivq_f64(vld1q_f64(up + i), m));
      const float64x2_t num = vsubq_f64(vld1q_f64(rhs + i), vmulq_f64(l, vld1q_f64(rhs + i - stride)));
      vst1q_f64(rhs + i, vdivq_f64(num, m));
    }
  }
  for (std::size_t r = n_rows - 1; r-- > 0;) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 2) {
      const std::size_t i = o + s;
      vst1q_f64(rhs + i, vsubq_f64(vld1q_f64(rhs + i),
                                   vmulq_f64(vld1q_f64(scratch + i), vld1q_f64(rhs + i + stride))));
    }
  }
  return tridiag_solve_columns(n_rows, vec_end, n_sys, stride, lo, di, up, rhs, scratch,
                               bad_row);
}

}  // namespace fpr::kernels::detail
