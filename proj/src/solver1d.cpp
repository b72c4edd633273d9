#include "fpr/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fpr/errors.hpp"
#include "fpr/io.hpp"
#include "fpr/tridiagonal.hpp"

namespace fpr {

void Grid1D::validate() const {
  if (M < 4) fail(ErrorKind::InvalidParameter, "grid needs M >= 4");
  if (N < 1) fail(ErrorKind::InvalidParameter, "grid needs N >= 1");
  if (!(x_max > x_min)) fail(ErrorKind::InvalidParameter, "grid needs x_max > x_min");
  if (!(T > t0)) fail(ErrorKind::InvalidParameter, "grid needs T > t0");
}

Grid1D padded_grid(double lo, double hi, double sq_diffusion, int M, double t0, double T,
                   int N) {
  if (hi < lo) std::swap(lo, hi);
  const double pad = std::max(3.0 * std::sqrt(sq_diffusion * (T - t0)), 0.1 * (hi - lo));
  Grid1D g{lo - pad, hi + pad, M, t0, T, N};
  g.validate();
  return g;
}

std::vector<double> cn_step(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                            std::span<const double> v_now, double t_now, double t_next,
                            double left, double right) {
  const int M = grid.M;
  if (static_cast<int>(v_now.size()) != M + 1) {
    fail(ErrorKind::InvalidInput, "cn_step: row has wrong length");
  }
  const double h = grid.h();
  const double half_k = 0.5 * (t_next - t_now);
  const double ih2 = 1.0 / (h * h);
  const double i2h = 0.5 / h;

  TridiagSystem sys;
  sys.resize(M + 1);
  std::vector<double> rhs(M + 1);
  sys.di[0] = 1.0;
  rhs[0] = left;
  sys.di[M] = 1.0;
  rhs[M] = right;

  for (int j = 1; j < M; ++j) {
    const double x = grid.x(j);
    // Spatial operator row: l V_{j-1} + d V_j + u V_{j+1}.
    auto stencil = [&](double t, double& l, double& d, double& u) {
      const double a = coeffs.zeroth(x, t);
      const double b = coeffs.first(x, t);
      const double c = coeffs.second(x, t);
      if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        fail(ErrorKind::Domain, "non-finite coefficient at x=" + fmt(x) + ", t=" + fmt(t));
      }
      l = c * ih2 - b * i2h;
      d = -2.0 * c * ih2 + a;
      u = c * ih2 + b * i2h;
    };
    double l0, d0, u0, l1, d1, u1;
    stencil(t_now, l0, d0, u0);
    stencil(t_next, l1, d1, u1);
    sys.lo[j] = -half_k * l1;
    sys.di[j] = 1.0 - half_k * d1;
    sys.up[j] = -half_k * u1;
    rhs[j] = v_now[j] + half_k * (l0 * v_now[j - 1] + d0 * v_now[j] + u0 * v_now[j + 1]);
  }
  auto next = solve_tridiagonal(sys, rhs);
  next[0] = left;
  next[M] = right;
  return next;
}

namespace {

RatioField march(const RatioCoefficients1D& coeffs, const Grid1D& grid, int first_row,
                 RatioField field, const std::function<double(double)>& left,
                 const std::function<double(double)>& right) {
  const int cols = grid.M + 1;
  for (int i = first_row; i < grid.N; ++i) {
    try {
      auto next = cn_step(coeffs, grid, field.row(i), grid.t(i), grid.t(i + 1),
                          left(grid.t(i + 1)), right(grid.t(i + 1)));
      std::copy(next.begin(), next.end(),
                field.values.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols);
    } catch (const Error& e) {
      fail(e.kind(), std::string(e.what()) + " (time index " + std::to_string(i + 1) + ")");
    }
  }
  return field;
}

}  // namespace

RatioField solve_parabolic_1d(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                              const std::function<double(double)>& initial,
                              const std::function<double(double)>& left,
                              const std::function<double(double)>& right) {
  grid.validate();
  RatioField f;
  f.grid = grid;
  f.effective_start = grid.t0;
  f.boundary_value = left(grid.t0);
  f.values.assign(static_cast<std::size_t>(grid.N + 1) * (grid.M + 1), 0.0);
  for (int j = 0; j <= grid.M; ++j) f.values[j] = initial(grid.x(j));
  f.values[0] = left(grid.t0);
  f.values[grid.M] = right(grid.t0);
  return march(coeffs, grid, 0, std::move(f), left, right);
}

RatioField solve_ratio_1d(const RatioCoefficients1D& coeffs, const Grid1D& grid,
                          double boundary_value) {
  grid.validate();
  RatioField f;
  f.grid = grid;
  f.boundary_value = boundary_value;
  f.effective_start = grid.t(1);
  f.values.assign(static_cast<std::size_t>(grid.N + 1) * (grid.M + 1), 1.0);
  for (int i = 0; i <= std::min(1, grid.N); ++i) {
    f.values[static_cast<std::size_t>(i) * (grid.M + 1)] = boundary_value;
    f.values[static_cast<std::size_t>(i) * (grid.M + 1) + grid.M] = boundary_value;
  }
  auto bc = [boundary_value](double) { return boundary_value; };
  return march(coeffs, grid, 1, std::move(f), bc, bc);
}

double eval_field(const RatioField& field, double x, double t) {
  const Grid1D& g = field.grid;
  if (!(x >= g.x_min && x <= g.x_max && t >= g.t0 && t <= g.T)) {
    fail(ErrorKind::Domain, "field query outside grid: x=" + fmt(x) + ", t=" + fmt(t));
  }
  // Queries within rounding of a node land on it exactly.
  auto snap = [](double f) {
    const double r = std::round(f);
    return std::abs(f - r) <= 1e-10 * std::max(1.0, std::abs(f)) ? r : f;
  };
  const double fx = snap((x - g.x_min) / g.h());
  const double ft = snap((t - g.t0) / g.k());
  const int j = std::clamp(static_cast<int>(std::floor(fx)), 0, g.M - 1);
  const int i = std::clamp(static_cast<int>(std::floor(ft)), 0, g.N - 1);
  const double wx = fx - j, wt = ft - i;
  // Exact at nodes: zero weights drop the neighbour without touching the value.
  auto lerp = [](double a, double b, double w) { return w == 0.0 ? a : (w == 1.0 ? b : a + w * (b - a)); };
  const double lo = lerp(field.at(i, j), field.at(i, j + 1), wx);
  const double hi = lerp(field.at(i + 1, j), field.at(i + 1, j + 1), wx);
  return lerp(lo, hi, wt);
}

void write_field_csv(const RatioField& field, std::ostream& out) {
  out << "t,x,V\n";
  const Grid1D& g = field.grid;
  for (int i = 0; i <= g.N; ++i) {
    const std::string ts = fmt(g.t(i));
    for (int j = 0; j <= g.M; ++j) {
      out << ts << ',' << fmt(g.x(j)) << ',' << fmt(field.at(i, j)) << '\n';
    }
  }
}

RatioField max_normalized(const RatioField& field) {
  RatioField out = field;
  const double m = *std::max_element(field.values.begin(), field.values.end());
  if (m > 0.0) {
    for (double& v : out.values) v /= m;
  }
  return out;
}

}  // namespace fpr
