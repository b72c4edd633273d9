#pragma once

#include <cstddef>
#include <string_view>

/// Batched tridiagonal kernels shared by the finite-difference solvers.
///
/// A batch holds `n_sys` independent systems of `n_rows` equations each,
/// interleaved so that entry (row r, system s) lives at `r * stride + s`.
/// Every ISA variant performs the same IEEE operations in the same order, so
/// results are bitwise identical across variants.
namespace fpr::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
/// Best available ISA unless overridden by force_isa() or FPR_FORCE_SCALAR=1.
Isa active_isa();
void force_isa(Isa isa);
void reset_isa();

/// y(r, s) = lo(r, s) x(r-1, s) + di(r, s) x(r, s) + up(r, s) x(r+1, s)
/// for 1 <= r <= n_rows - 2. Rows 0 and n_rows - 1 of y are untouched.
void tridiag_apply(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                   const double* lo, const double* di, const double* up, const double* x,
                   double* y);

/// Thomas elimination without pivoting, in place on `rhs`. `lo` of row 0 and
/// `up` of the last row are ignored. `scratch` needs the same extent as rhs.
/// Returns false (with the offending row in `bad_row`) on a zero or
/// non-finite pivot.
bool tridiag_solve(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                   const double* lo, const double* di, const double* up, double* rhs,
                   double* scratch, std::size_t* bad_row);

namespace detail {

using ApplyFn = void (*)(std::size_t, std::size_t, std::size_t, const double*,
                         const double*, const double*, const double*, double*);
using SolveFn = bool (*)(std::size_t, std::size_t, std::size_t, const double*,
                         const double*, const double*, double*, double*, std::size_t*);

void tridiag_apply_scalar(std::size_t, std::size_t, std::size_t, const double*,
                          const double*, const double*, const double*, double*);
bool tridiag_solve_scalar(std::size_t, std::size_t, std::size_t, const double*,
                          const double*, const double*, double*, double*, std::size_t*);
// Scalar column helpers used for remainders by the vector variants.
void tridiag_apply_columns(std::size_t n_rows, std::size_t s_begin, std::size_t s_end,
                           std::size_t stride, const double* lo, const double* di,
                           const double* up, const double* x, double* y);
bool tridiag_solve_columns(std::size_t n_rows, std::size_t s_begin, std::size_t s_end,
                           std::size_t stride, const double* lo, const double* di,
                           const double* up, double* rhs, double* scratch,
                           std::size_t* bad_row);

#if defined(FPR_HAVE_AVX2)
void tridiag_apply_avx2(std::size_t, std::size_t, std::size_t, const double*,
                        const double*, const double*, const double*, double*);
bool tridiag_solve_avx2(std::size_t, std::size_t, std::size_t, const double*,
                        const double*, const double*, double*, double*, std::size_t*);
#endif
#if defined(FPR_HAVE_NEON)
void tridiag_apply_neon(std::size_t, std::size_t, std::size_t, const double*,
                        const double*, const double*, const double*, double*);
bool tridiag_solve_neon(std::size_t, std::size_t, std::size_t, const double*,
                        const double*, const double*, double*, double*, std::size_t*);
#endif

}  // namespace detail
}  // namespace fpr::kernels
