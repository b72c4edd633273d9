#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fpr/ratio_pde.hpp"

namespace fpr {

struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int M = 4;
  double t0 = 0.0;
  double T = 1.0;
  int N = 1;

  double h() const { return (x_max - x_min) / M; }
  double k() const { return (T - t0) / N; }
  double x(int j) const { return x_min + j * h(); }
  double t(int i) const { return t0 + i * k(); }
  /// Throws InvalidParameter unless M >= 4, N >= 1, x_max > x_min, T > t0.
  void validate() const;
};

/// Grid whose spatial range covers [lo, hi] plus
/// pad = max(3 sqrt(sq_diffusion * (T - t0)), 10% of hi - lo) on each side.
Grid1D padded_grid(double lo, double hi, double sq_diffusion, int M, double t0, double T,
                   int N);

/// Space-time field, row-major by time: values[i * (M + 1) + j] = V(x_j, t_i).
struct RatioField {
  Grid1D grid;
  std::vector<double> values;
  double boundary_value = 1.0;
  /// Time at which the unit initial condition is imposed (t0 + k for ratio
  /// solves, since the coefficients are singular at t0).
  double effective_start = 0.0;

  int cols() const { return grid.M + 1; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols() + j]; }
  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * cols(),
            static_cast<std::size_t>(cols())};
  }
};

/// One Crank-Nicolson step with Dirichlet data (left, right) at t_next.
/// Coefficients are sampled at t_now for the explicit half and t_next for the
/// implicit half.
std::vector<double> cn_step(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                            std::span<const double> v_now, double t_now, double t_next,
                            double left, double right);

/// General march from t0 with the given initial profile and boundary data;
/// used for ratio solves and manufactured-solution checks.
RatioField solve_parabolic_1d(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                              const std::function<double(double x)>& initial,
                              const std::function<double(double t)>& left,
                              const std::function<double(double t)>& right);

/// Ratio solve: rows 0 and 1 hold V = 1 (t0 and the effective start t0 + k);
/// Crank-Nicolson proceeds from row 1.
RatioField solve_ratio_1d(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                          double boundary_value = 1.0);

/// Bilinear interpolation; throws Domain outside the grid.
double eval_field(const RatioField& field, double x, double t);

/// Header `t,x,V`, one row per node, ordered by time then x.
void write_field_csv(const RatioField& field, std::ostream& out);

/// Copy of the field divided by its global maximum (display only).
RatioField max_normalized(const RatioField& field);

}  // namespace fpr
