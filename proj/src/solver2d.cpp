#include "fpr/solver2d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "fpr/errors.hpp"
#include "fpr/io.hpp"
#include "fpr/kernels.hpp"

namespace fpr {

void Grid2D::validate(bool logit_ranges) const {
  if (Mx < 4 || My < 4) fail(ErrorKind::InvalidParameter, "grid needs Mx, My >= 4");
  if (N < 1) fail(ErrorKind::InvalidParameter, "grid needs N >= 1");
  if (!(x_max > x_min) || !(y_max > y_min)) {
    fail(ErrorKind::InvalidParameter, "grid ranges must be increasing");
  }
  if (!(T > t0)) fail(ErrorKind::InvalidParameter, "grid needs T > t0");
  if (dt() > std::min(dx(), dy()) * (1.0 + 1e-12)) {
    fail(ErrorKind::InvalidParameter, "time step " + fmt(dt()) + " exceeds min(dx, dy) = " +
                                          fmt(std::min(dx(), dy())));
  }
  if (logit_ranges) {
    check_trig_safe_interval(x_min, x_max);
    check_trig_safe_interval(y_min, y_max);
  }
}

Grid2D logit_window_grid(double margin, int M, double t0, double T, int N) {
  if (!(margin > 0.0 && margin < std::numbers::pi / 2)) {
    fail(ErrorKind::InvalidParameter, "logit window margin must lie in (0, pi/2)");
  }
  const double cap = std::numbers::pi / 2 - margin;
  Grid2D g{-cap, cap, -cap, cap, M, M, t0, T, N};
  g.validate(true);
  return g;
}

Pde2D ratio_pde_2d(const RatioCoefficients2D& c) {
  Pde2D p;
  p.alpha = c.alpha;
  p.p = c.cx;
  p.q = c.dy;
  p.r = [eps = c.eps, f = c.reaction_factor](double x, double y, double t) {
    return f * eps(x, y, t);
  };
  return p;
}

namespace {

using Fn = std::function<double(double, double, double)>;

std::vector<double> sample_mesh(const Fn& f, const Grid2D& g, double t, const char* name) {
  std::vector<double> out(static_cast<std::size_t>(g.nx()) * g.ny());
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x(i), y = g.y(j);
      double v;
      try {
        v = f(x, y, t);
      } catch (const Error& e) {
        fail(e.kind(), std::string("assembling ") + name + " at (i=" + std::to_string(i) +
                           ", j=" + std::to_string(j) + "): " + e.what());
      }
      if (!std::isfinite(v)) {
        fail(ErrorKind::Domain, std::string("non-finite ") + name + " at x=" + fmt(x) +
                                    ", y=" + fmt(y) + ", t=" + fmt(t));
      }
      out[static_cast<std::size_t>(j) * g.nx() + i] = v;
    }
  }
  return out;
}

// Fills the interior rows of (A, L) for a line of `n` nodes with spacing h.
// c_at(k), e_at(k) give the directional coefficients at node k of the line;
// out_index(k) is the storage index.
template <class CAt, class EAt, class Idx>
void fill_line(int n, double h, double alpha, SpatialOrder order, CAt c_at, EAt e_at,
               Idx out_index, CompactOperators& ops, bool x_dir) {
  Stencil3& A = x_dir ? ops.ax : ops.ay;
  Stencil3& L = x_dir ? ops.lx : ops.ly;
  const double h2 = h * h;
  const double w = h2 / 12.0;
  for (int k = 1; k + 1 < n; ++k) {
    const std::size_t o = out_index(k);
    const double c = c_at(k), e = e_at(k);
    double P = alpha, Q = c, R = e;
    if (order == SpatialOrder::Compact4) {
      const double c1 = (c_at(k + 1) - c_at(k - 1)) / (2.0 * h);
      const double c2 = (c_at(k + 1) - 2.0 * c + c_at(k - 1)) / h2;
      const double e1 = (e_at(k + 1) - e_at(k - 1)) / (2.0 * h);
      const double e2 = (e_at(k + 1) - 2.0 * e + e_at(k - 1)) / h2;
      P = alpha + w * (c * c / alpha - e - 2.0 * c1);
      Q = c + w * (c2 - c / alpha * c1 + 2.0 * e1 - c * e / alpha);
      R = e + w * (e2 - c / alpha * e1);
      L.lo[o] = 1.0 / 12.0 + c * h / (24.0 * alpha);
      L.di[o] = 5.0 / 6.0;
      L.up[o] = 1.0 / 12.0 - c * h / (24.0 * alpha);
    } else {
      L.lo[o] = 0.0;
      L.di[o] = 1.0;
      L.up[o] = 0.0;
    }
    A.lo[o] = -P / h2 - Q / (2.0 * h);
    A.di[o] = 2.0 * P / h2 + R;
    A.up[o] = -P / h2 + Q / (2.0 * h);
  }
}

void resize(Stencil3& s, std::size_t n) {
  s.lo.assign(n, 0.0);
  s.di.assign(n, 0.0);
  s.up.assign(n, 0.0);
}

// a + sign * tau * b, element-wise per stencil band.
Stencil3 combine(const Stencil3& l, const Stencil3& a, double sign_tau) {
  Stencil3 s;
  s.lo.resize(l.lo.size());
  s.di.resize(l.di.size());
  s.up.resize(l.up.size());
  for (std::size_t k = 0; k < l.lo.size(); ++k) {
    s.lo[k] = l.lo[k] + sign_tau * a.lo[k];
    s.di[k] = l.di[k] + sign_tau * a.di[k];
    s.up[k] = l.up[k] + sign_tau * a.up[k];
  }
  return s;
}

// Turns rows with index along the line equal to 0 or n_rows-1 into identity rows.
void pin_boundary_rows(Stencil3& s, std::size_t n_rows, std::size_t stride) {
  for (std::size_t r : {std::size_t{0}, n_rows - 1}) {
    for (std::size_t k = 0; k < stride; ++k) {
      const std::size_t i = r * stride + k;
      s.lo[i] = 0.0;
      s.di[i] = 1.0;
      s.up[i] = 0.0;
    }
  }
}

void transpose(std::span<const double> in, std::span<double> out, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out[static_cast<std::size_t>(c) * rows + r] = in[static_cast<std::size_t>(r) * cols + c];
    }
  }
}

void solve_or_fail(std::size_t n_rows, std::size_t n_sys, std::size_t stride, const Stencil3& s,
                   std::size_t offset, std::vector<double>& rhs, std::vector<double>& scratch,
                   const char* dir) {
  std::size_t bad = 0;
  if (!kernels::tridiag_solve(n_rows, n_sys, stride, s.lo.data() + offset,
                              s.di.data() + offset, s.up.data() + offset, rhs.data() + offset,
                              scratch.data() + offset, &bad)) {
    fail(ErrorKind::SolverBreakdown,
         std::string("banded solve breakdown in ") + dir + "-line sweep at row " +
             std::to_string(bad));
  }
}

}  // namespace

CompactOperators assemble_operators(const Pde2D& pde, const Grid2D& g, double t,
                                    SpatialOrder order) {
  if (!(pde.alpha > 0.0)) fail(ErrorKind::InvalidParameter, "alpha must be positive");
  const auto P = sample_mesh(pde.p, g, t, "x-advection");
  const auto Q = sample_mesh(pde.q, g, t, "y-advection");
  const auto Rm = sample_mesh(pde.r, g, t, "reaction");
  const int nx = g.nx(), ny = g.ny();
  CompactOperators ops;
  ops.nx = nx;
  ops.ny = ny;
  ops.t = t;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  for (Stencil3* s : {&ops.ax, &ops.lx, &ops.ay, &ops.ly}) resize(*s, n);

  auto mesh = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
  for (int j = 1; j + 1 < ny; ++j) {
    fill_line(
        nx, g.dx(), pde.alpha, order, [&](int i) { return -P[mesh(i, j)]; },
        [&](int i) { return -0.5 * Rm[mesh(i, j)]; },
        [&](int i) { return static_cast<std::size_t>(i) * ny + j; }, ops, true);
  }
  // y stencils on the x-boundary columns too: they carry the intermediate
  // boundary data of the x sweep.
  for (int i = 0; i < nx; ++i) {
    fill_line(
        ny, g.dy(), pde.alpha, order, [&](int j) { return -Q[mesh(i, j)]; },
        [&](int j) { return -0.5 * Rm[mesh(i, j)]; }, [&](int j) { return mesh(i, j); }, ops,
        false);
  }
  return ops;
}

std::vector<double> apply_x(const Stencil3& s, const Grid2D& g, std::span<const double> v) {
  const int nx = g.nx(), ny = g.ny();
  std::vector<double> vt(v.size()), yt(v.size(), 0.0), out(v.size());
  transpose(v, vt, ny, nx);
  kernels::tridiag_apply(nx, ny, ny, s.lo.data(), s.di.data(), s.up.data(), vt.data(),
                         yt.data());
  transpose(yt, out, nx, ny);
  return out;
}

std::vector<double> apply_y(const Stencil3& s, const Grid2D& g, std::span<const double> v) {
  const int nx = g.nx(), ny = g.ny();
  std::vector<double> out(v.size(), 0.0);
  kernels::tridiag_apply(ny, nx, nx, s.lo.data(), s.di.data(), s.up.data(), v.data(),
                         out.data());
  for (int j = 0; j < ny; ++j) {
    out[static_cast<std::size_t>(j) * nx] = 0.0;
    out[static_cast<std::size_t>(j) * nx + nx - 1] = 0.0;
  }
  return out;
}

std::vector<double> adi_step(const CompactOperators& now, const CompactOperators& next,
                             const Grid2D& g, std::span<const double> v, double dt,
                             std::span<const double> gb) {
  const int nx = g.nx(), ny = g.ny();
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (v.size() != n || gb.size() != n || now.nx != nx || now.ny != ny || next.nx != nx ||
      next.ny != ny) {
    fail(ErrorKind::InvalidInput, "adi_step: mesh size mismatch");
  }
  const double tau = 0.5 * dt;
  const Stencil3 ey = combine(now.ly, now.ay, -tau);
  const Stencil3 ex = combine(now.lx, now.ax, -tau);
  Stencil3 iy = combine(next.ly, next.ay, tau);
  Stencil3 ix = combine(next.lx, next.ax, tau);

  // W = (Ly - tau Ay) V on interior y rows, every column.
  std::vector<double> w(n, 0.0);
  kernels::tridiag_apply(ny, nx, nx, ey.lo.data(), ey.di.data(), ey.up.data(), v.data(),
                         w.data());
  // Boundary data for the intermediate level: V* = (Ly + tau Ay) g on the x ends.
  std::vector<double> gq(n, 0.0);
  kernels::tridiag_apply(ny, nx, nx, iy.lo.data(), iy.di.data(), iy.up.data(), gb.data(),
                         gq.data());

  // x sweep in x-major layout.
  std::vector<double> wt(n), rhs_t(n, 0.0), scratch(n);
  transpose(w, wt, ny, nx);
  kernels::tridiag_apply(nx, ny, ny, ex.lo.data(), ex.di.data(), ex.up.data(), wt.data(),
                         rhs_t.data());
  for (int j = 1; j + 1 < ny; ++j) {
    rhs_t[j] = gq[static_cast<std::size_t>(j) * nx];
    rhs_t[static_cast<std::size_t>(nx - 1) * ny + j] = gq[static_cast<std::size_t>(j) * nx + nx - 1];
  }
  pin_boundary_rows(ix, nx, ny);
  solve_or_fail(nx, ny - 2, ny, ix, 1, rhs_t, scratch, "x");

  // y sweep in mesh layout.
  std::vector<double> out(n);
  transpose(rhs_t, out, nx, ny);
  for (int i = 0; i < nx; ++i) {
    out[i] = gb[i];
    out[static_cast<std::size_t>(ny - 1) * nx + i] = gb[static_cast<std::size_t>(ny - 1) * nx + i];
  }
  pin_boundary_rows(iy, ny, nx);
  solve_or_fail(ny, nx - 2, nx, iy, 1, out, scratch, "y");
  for (int j = 0; j < ny; ++j) {
    out[static_cast<std::size_t>(j) * nx] = gb[static_cast<std::size_t>(j) * nx];
    out[static_cast<std::size_t>(j) * nx + nx - 1] = gb[static_cast<std::size_t>(j) * nx + nx - 1];
  }
  return out;
}

namespace {

RatioField2D march(const Pde2D& pde, const Grid2D& g, int first_level, RatioField2D field,
                   const Fn& boundary, SpatialOrder order) {
  const std::size_t n = field.level_size();
  std::vector<double> gb(n);
  for (int lvl = first_level; lvl < g.N; ++lvl) {
    try {
      const double t_next = g.t(lvl + 1);
      const double t_mid = 0.5 * (g.t(lvl) + t_next);
      for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
          gb[static_cast<std::size_t>(j) * g.nx() + i] = boundary(g.x(i), g.y(j), t_next);
        }
      }
      const CompactOperators ops = assemble_operators(pde, g, t_mid, order);
      auto next = adi_step(ops, ops, g, field.level(lvl), g.dt(), gb);
      std::copy(next.begin(), next.end(), field.values.begin() + (lvl + 1) * n);
    } catch (const Error& e) {
      fail(e.kind(), std::string(e.what()) + " (time level " + std::to_string(lvl + 1) + ")");
    }
  }
  return field;
}

}  // namespace

RatioField2D solve_parabolic_2d(const Pde2D& pde, const Grid2D& g,
                                const std::function<double(double, double)>& initial,
                                const Fn& boundary, SpatialOrder order) {
  g.validate(false);
  RatioField2D f;
  f.grid = g;
  f.effective_start = g.t0;
  f.values.assign((g.N + 1) * f.level_size(), 0.0);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const bool ring = i == 0 || j == 0 || i == g.Mx || j == g.My;
      f.values[static_cast<std::size_t>(j) * g.nx() + i] =
          ring ? boundary(g.x(i), g.y(j), g.t0) : initial(g.x(i), g.y(j));
    }
  }
  return march(pde, g, 0, std::move(f), boundary, order);
}

RatioField2D solve_ratio_2d(const RatioCoefficients2D& coeffs, const Grid2D& g,
                            SpatialOrder order) {
  g.validate(true);
  RatioField2D f;
  f.grid = g;
  f.effective_start = g.t(1);
  f.values.assign((g.N + 1) * f.level_size(), 1.0);
  const Fn one = [](double, double, double) { return 1.0; };
  return march(ratio_pde_2d(coeffs), g, 1, std::move(f), one, order);
}

double eval_field_2d(const RatioField2D& field, double x, double y, double t) {
  const Grid2D& g = field.grid;
  if (!(x >= g.x_min && x <= g.x_max && y >= g.y_min && y <= g.y_max && t >= g.t0 &&
        t <= g.T)) {
    fail(ErrorKind::Domain, "field query outside grid: (" + fmt(x) + ", " + fmt(y) +
                                ") at t=" + fmt(t));
  }
  auto snap = [](double f) {
    const double r = std::round(f);
    return std::abs(f - r) <= 1e-10 * std::max(1.0, std::abs(f)) ? r : f;
  };
  const double fx = snap((x - g.x_min) / g.dx()), fy = snap((y - g.y_min) / g.dy()),
               ft = snap((t - g.t0) / g.dt());
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.Mx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.My - 1);
  const int n = std::clamp(static_cast<int>(std::floor(ft)), 0, g.N - 1);
  const double wx = fx - i, wy = fy - j, wt = ft - n;
  auto lerp = [](double a, double b, double w) {
    return w == 0.0 ? a : (w == 1.0 ? b : a + w * (b - a));
  };
  auto plane = [&](int lvl) {
    const double lo = lerp(field.at(lvl, i, j), field.at(lvl, i + 1, j), wx);
    const double hi = lerp(field.at(lvl, i, j + 1), field.at(lvl, i + 1, j + 1), wx);
    return lerp(lo, hi, wy);
  };
  return lerp(plane(n), plane(n + 1), wt);
}

void write_field2d_csv(const RatioField2D& field, std::ostream& out, std::span<const int> levels) {
  const Grid2D& g = field.grid;
  std::vector<int> all;
  if (levels.empty()) {
    for (int n = 0; n <= g.N; ++n) all.push_back(n);
    levels = all;
  }
  out << "t,x,y,V\n";
  for (int n : levels) {
    if (n < 0 || n > g.N) fail(ErrorKind::InvalidInput, "snapshot level out of range");
    const std::string ts = fmt(g.t(n));
    for (int j = 0; j < g.ny(); ++j) {
      const std::string ys = fmt(g.y(j));
      for (int i = 0; i < g.nx(); ++i) {
        out << ts << ',' << fmt(g.x(i)) << ',' << ys << ',' << fmt(field.at(n, i, j)) << '\n';
      }
    }
  }
}

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) fail(ErrorKind::Io, "truncated binary field");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_field2d_binary(const RatioField2D& field, std::ostream& out) {
  const Grid2D& g = field.grid;
  if (g.nx() > 65535 || g.ny() > 65535 || g.N + 1 > 65535) {
    fail(ErrorKind::InvalidInput, "field too large for the binary header");
  }
  out.write("F2", 2);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.nx()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.ny()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.N + 1));
  for (double r : {g.x_min, g.x_max, g.y_min, g.y_max, g.t0, g.T}) {
    put_le<float>(out, static_cast<float>(r));
  }
  for (double v : field.values) put_le<double>(out, v);
  if (!out) fail(ErrorKind::Io, "binary field write failed");
}

RatioField2D read_field2d_binary(std::istream& in) {
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'F' || magic[1] != '2') fail(ErrorKind::Io, "bad binary field magic");
  RatioField2D f;
  const int nx = get_le<std::uint16_t>(in), ny = get_le<std::uint16_t>(in),
            nt = get_le<std::uint16_t>(in);
  float r[6];
  for (float& v : r) v = get_le<float>(in);
  f.grid = Grid2D{r[0], r[1], r[2], r[3], nx - 1, ny - 1, r[4], r[5], nt - 1};
  f.values.resize(static_cast<std::size_t>(nx) * ny * nt);
  for (double& v : f.values) v = get_le<double>(in);
  f.effective_start = f.grid.t0;
  return f;
}

RatioField2D max_normalized(const RatioField2D& field) {
  RatioField2D out = field;
  const double m = *std::max_element(field.values.begin(), field.values.end());
  if (m > 0.0) {
    for (double& v : out.values) v /= m;
  }
  return out;
}

}  // namespace fpr
