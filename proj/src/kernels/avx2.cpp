#include <immintrin.h>

#include "fpr/kernels.hpp"

namespace fpr::kernels::detail {

namespace {

// True in any lane where |m| <= 1e-300 or m is not finite.
inline int bad_pivot_mask(__m256d m) {
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d a = _mm256_and_pd(m, abs_mask);
  const __m256d ok_small = _mm256_cmp_pd(a, _mm256_set1_pd(1e-300), _CMP_GT_OQ);
  const __m256d ok_finite = _mm256_cmp_pd(a, _mm256_set1_pd(1.7976931348623157e308),
                                          _CMP_LE_OQ);
  return _mm256_movemask_pd(_mm256_and_pd(ok_small, ok_finite)) ^ 0xF;
}

}  // namespace

void tridiag_apply_avx2(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                        const double* lo, const double* di, const double* up, const double* x,
                        double* y) {
  const std::size_t vec_end = n_sys / 4 * 4;
  for (std::size_t r = 1; r + 1 < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 4) {
      const std::size_t i = o + s;
      const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(x + i - stride));
      const __m256d b = _mm256_mul_pd(_mm256_loadu_pd(di + i), _mm256_loadu_pd(x + i));
      const __m256d c = _mm256_mul_pd(_mm256_loadu_pd(up + i), _mm256_loadu_pd(x + i + stride));
      _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_add_pd(a, b), c));
    }
  }
  tridiag_apply_columns(n_rows, vec_end, n_sys, stride, lo, di, up, x, y);
}

bool tridiag_solve_avx2(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                        const double* lo, const double* di, const double* up, double* rhs,
                        double* scratch, std::size_t* bad_row) {
  const std::size_t vec_end = n_sys / 4 * 4;
  for (std::size_t s = 0; s < vec_end; s += 4) {
    const __m256d d = _mm256_loadu_pd(di + s);
    if (bad_pivot_mask(d)) {
      if (bad_row) *bad_row = 0;
      return false;
    }
    _mm256_storeu_pd(scratch + s, _mm256_div_pd(_mm256_loadu_pd(up + s), d));
    _mm256_storeu_pd(rhs + s, _mm256_div_pd(_mm256_loadu_pd(rhs + s), d));
  }
  for (std::size_t r = 1; r < n_rows; ++r) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 4) {
      const std::size_t i = o + s;
      const __m256d l = _mm256_loadu_pd(lo + i);
      const __m256d m = _mm256_sub_pd(_mm256_loadu_pd(di + i),
                                      _mm256_mul_pd(l, _mm256_loadu_pd(scratch + i - stride)));
      if (bad_pivot_mask(m)) {
        if (bad_row) *bad_row = r;
        return false;
      }
      _mm256_storeu_pd(scratch + i, _mm256_div_pd(_mm256_loadu_pd(up + i), m));
      const __m256d num = _mm256_sub_pd(_mm256_loadu_pd(rhs + i),
                                        _mm256_mul_pd(l, _mm256_loadu_pd(rhs + i - stride)));
      _mm256_storeu_pd(rhs + i, _mm256_div_pd(num, m));
    }
  }
  for (std::size_t r = n_rows - 1; r-- > 0;) {
    const std::size_t o = r * stride;
    for (std::size_t s = 0; s < vec_end; s += 4) {
      const std::size_t i = o + s;
      const __m256d v = _mm256_sub_pd(
          _mm256_loadu_pd(rhs + i),
          _mm256_mul_pd(_mm256_loadu_pd(scratch + i), _mm256_loadu_pd(rhs + i + stride)));
      _mm256_storeu_pd(rhs + i, v);
    }
  }
  return tridiag_solve_columns(n_rows, vec_end, n_sys, stride, lo, di, up, rhs, scratch,
                               bad_row);
}

}  // namespace fpr::kernels::detail
