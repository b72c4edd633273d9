#include <atomic>
#include <cstdlib>
#include <string>

#include "fpr/kernels.hpp"

namespace fpr::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("FPR_FORCE_SCALAR"); env && std::string(env) == "1") {
    return Isa::Scalar;
  }
#if defined(FPR_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
#endif
#if defined(FPR_HAVE_NEON)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

std::atomic<int> g_override{-1};

Isa current() {
  static const Isa detected = detect();
  const int o = g_override.load(std::memory_order_relaxed);
  return o < 0 ? detected : static_cast<Isa>(o);
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(FPR_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(FPR_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current(); }

void force_isa(Isa isa) {
  g_override.store(isa_available(isa) ? static_cast<int>(isa) : static_cast<int>(Isa::Scalar));
}

void reset_isa() { g_override.store(-1); }

void tridiag_apply(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                   const double* lo, const double* di, const double* up, const double* x,
                   double* y) {
  switch (current()) {
#if defined(FPR_HAVE_AVX2)
    case Isa::Avx2: return detail::tridiag_apply_avx2(n_rows, n_sys, stride, lo, di, up, x, y);
#endif
#if defined(FPR_HAVE_NEON)
    case Isa::Neon: return detail::tridiag_apply_neon(n_rows, n_sys, stride, lo, di, up, x, y);
#endif
    default: return detail::tridiag_apply_scalar(n_rows, n_sys, stride, lo, di, up, x, y);
  }
}

bool tridiag_solve(std::size_t n_rows, std::size_t n_sys, std::size_t stride,
                   const double* lo, const double* di, const double* up, double* rhs,
                   double* scratch, std::size_t* bad_row) {
  if (n_rows == 0 || n_sys == 0) return true;
  switch (current()) {
#if defined(FPR_HAVE_AVX2)
    case Isa::Avx2:
      return detail::tridiag_solve_avx2(n_rows, n_sys, stride, lo, di, up, rhs, scratch, bad_row);
#endif
#if defined(FPR_HAVE_NEON)
    case Isa::Neon:
      return detail::tridiag_solve_neon(n_rows, n_sys, stride, lo, di, up, rhs, scratch, bad_row);
#endif
    default:
      return detail::tridiag_solve_scalar(n_rows, n_sys, stride, lo, di, up, rhs, scratch,
                                          bad_row);
  }
}

}  // namespace fpr::kernels
