#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fpr/ratio_pde.hpp"

namespace fpr {

struct Grid2D {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int Mx = 4, My = 4;
  double t0 = 0.0, T = 1.0;
  int N = 1;

  int nx() const { return Mx + 1; }
  int ny() const { return My + 1; }
  double dx() const { return (x_max - x_min) / Mx; }
  double dy() const { return (y_max - y_min) / My; }
  double dt() const { return (T - t0) / N; }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  double t(int n) const { return t0 + n * dt(); }
  /// Enforces Mx, My >= 4, N >= 1, ordered ranges and dt <= min(dx, dy).
  /// With `logit_ranges`, also rejects ranges containing odd multiples of pi/2.
  void validate(bool logit_ranges = false) const;
};

/// Square logit window |beta| <= pi/2 - margin in both coordinates.
Grid2D logit_window_grid(double margin, int M, double t0, double T, int N);

/// dV/dt = alpha (V_xx + V_yy) + p V_x + q V_y + r V.
struct Pde2D {
  double alpha = 0.5;
  std::function<double(double x, double y, double t)> p, q, r;
};

Pde2D ratio_pde_2d(const RatioCoefficients2D& coeffs);

enum class SpatialOrder { Compact4, Second };

/// Per-node three-point stencil.
struct Stencil3 {
  std::vector<double> lo, di, up;
};

/// Directional operators at one time level. Each direction is split as
/// -alpha u'' + c u' + e u with c = -p (or -q) and e = -r/2; the compact
/// form gives L^{-1} A u = -alpha u'' + c u' + e u + O(h^4).
///
/// x stencils use x-major layout (index i * ny + j); y stencils use the mesh
/// layout (index j * nx + i). Entries at boundary nodes of a stencil's own
/// direction are left zero; y stencils exist on the x-boundary columns.
struct CompactOperators {
  int nx = 0, ny = 0;
  double t = 0.0;
  Stencil3 ax, lx, ay, ly;
};

CompactOperators assemble_operators(const Pde2D& pde, const Grid2D& grid, double t,
                                    SpatialOrder order = SpatialOrder::Compact4);

/// Applies an x stencil to a mesh function (mesh layout); interior x nodes only,
/// other entries are zero.
std::vector<double> apply_x(const Stencil3& s, const Grid2D& grid, std::span<const double> v);
std::vector<double> apply_y(const Stencil3& s, const Grid2D& grid, std::span<const double> v);

/// One factored step
///   (Lx + dt/2 Ax)(Ly + dt/2 Ay) V^{n+1} = (Lx - dt/2 Ax)(Ly - dt/2 Ay) V^n
/// as an x-line sweep followed by a y-line sweep. `boundary_next` is the
/// Dirichlet data at the new time level (mesh layout, only the ring is read).
std::vector<double> adi_step(const CompactOperators& ops_now, const CompactOperators& ops_next,
                             const Grid2D& grid, std::span<const double> v_now, double dt,
                             std::span<const double> boundary_next);

/// Time-stamped stack of mesh functions (mesh layout per level).
struct RatioField2D {
  Grid2D grid;
  std::vector<double> values;
  double effective_start = 0.0;

  std::size_t level_size() const { return static_cast<std::size_t>(grid.nx()) * grid.ny(); }
  std::span<const double> level(int n) const {
    return {values.data() + n * level_size(), level_size()};
  }
  double at(int n, int i, int j) const {
    return values[n * level_size() + static_cast<std::size_t>(j) * grid.nx() + i];
  }
};

RatioField2D solve_parabolic_2d(const Pde2D& pde, const Grid2D& grid,
                                const std::function<double(double x, double y)>& initial,
                                const std::function<double(double x, double y, double t)>& boundary,
                                SpatialOrder order = SpatialOrder::Compact4);

/// Ratio solve: levels 0 and 1 hold V = 1, ADI starts at t0 + dt, boundary V = 1.
/// Coefficients are frozen at the step midpoint.
RatioField2D solve_ratio_2d(const RatioCoefficients2D& coeffs, const Grid2D& grid,
                            SpatialOrder order = SpatialOrder::Compact4);

/// Bilinear in space, linear in time; throws Domain outside the grid.
double eval_field_2d(const RatioField2D& field, double x, double y, double t);

/// Header `t,x,y,V`; `levels` empty means all levels.
void write_field2d_csv(const RatioField2D& field, std::ostream& out,
                       std::span<const int> levels = {});

/// 32-byte little-endian header then float64 values in level, y, x order:
///   char magic[2] = "F2"; uint16 nx, ny, nt; float32 x_min, x_max, y_min,
///   y_max, t0, T.
void write_field2d_binary(const RatioField2D& field, std::ostream& out);
RatioField2D read_field2d_binary(std::istream& in);

RatioField2D max_normalized(const RatioField2D& field);

}  // namespace fpr
