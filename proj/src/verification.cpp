#include "fpr/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "fpr/errors.hpp"
#include "fpr/io.hpp"
#include "fpr/solver1d.hpp"
#include "fpr/solver2d.hpp"

namespace fpr {

namespace {

constexpr double kPi = std::numbers::pi;

// V = exp(-t)(2 + sin(pi x)) under V_t = a V + b V_x + c V_xx with
// b = 0.5 + x, c = 0.5 + 0.25 x and a chosen so V is exact.
double mms1_v(double x, double t) { return std::exp(-t) * (2.0 + std::sin(kPi * x)); }

RatioCoefficients1D mms1_coeffs() {
  RatioCoefficients1D c;
  c.first = [](double x, double) { return 0.5 + x; };
  c.second = [](double x, double) { return 0.5 + 0.25 * x; };
  c.zeroth = [](double x, double) {
    const double s = std::sin(kPi * x), co = std::cos(kPi * x);
    const double v = 2.0 + s;
    const double vx = kPi * co, vxx = -kPi * kPi * s;
    return (-v - (0.5 + x) * vx - (0.5 + 0.25 * x) * vxx) / v;
  };
  return c;
}

double mms1_error(int M, int N) {
  const Grid1D g{0.0, 1.0, M, 0.0, 1.0, N};
  const auto f = solve_parabolic_1d(
      mms1_coeffs(), g, [](double x) { return mms1_v(x, 0.0); },
      [](double t) { return mms1_v(0.0, t); }, [](double t) { return mms1_v(1.0, t); });
  double err = 0.0;
  for (int j = 0; j <= M; ++j) err = std::max(err, std::abs(f.at(N, j) - mms1_v(g.x(j), g.T)));
  return err;
}

double heat_v(double x, double y, double t) {
  return std::exp(-kPi * kPi * t) * std::sin(kPi * x) * std::sin(kPi * y);
}

Pde2D heat_pde() {
  Pde2D p;
  p.alpha = 0.5;
  p.p = p.q = p.r = [](double, double, double) { return 0.0; };
  return p;
}

double heat_error(int M, int N, double T) {
  const Grid2D g{0.0, 1.0, 0.0, 1.0, M, M, 0.0, T, N};
  const auto f = solve_parabolic_2d(
      heat_pde(), g, [](double x, double y) { return heat_v(x, y, 0.0); },
      [](double x, double y, double t) { return heat_v(x, y, t); });
  double err = 0.0;
  for (int j = 0; j <= M; ++j) {
    for (int i = 0; i <= M; ++i) err = std::max(err, std::abs(f.at(N, i, j) - heat_v(g.x(i), g.y(j), T)));
  }
  return err;
}

// V = exp(-t)(2 + sin(pi x) sin(pi y)) with variable advection and a
// reaction term chosen so V is exact.
double mms2_v(double x, double y, double t) {
  return std::exp(-t) * (2.0 + std::sin(kPi * x) * std::sin(kPi * y));
}

Pde2D mms2_pde() {
  Pde2D p;
  p.alpha = 0.5;
  p.p = [](double, double y, double t) { return 0.5 + 0.3 * y + 0.2 * t; };
  p.q = [](double x, double, double) { return -0.4 + 0.2 * x; };
  p.r = [pp = p.p, qq = p.q](double x, double y, double t) {
    const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
    const double v = 2.0 + sx * sy;
    const double vx = kPi * std::cos(kPi * x) * sy, vy = kPi * sx * std::cos(kPi * y);
    const double lap = -2.0 * kPi * kPi * sx * sy;
    return (-v - 0.5 * lap - pp(x, y, t) * vx - qq(x, y, t) * vy) / v;
  };
  return p;
}

RatioField2D mms2_solve(int M, int N, double T) {
  const Grid2D g{0.0, 1.0, 0.0, 1.0, M, M, 0.0, T, N};
  return solve_parabolic_2d(
      mms2_pde(), g, [](double x, double y) { return mms2_v(x, y, 0.0); },
      [](double x, double y, double t) { return mms2_v(x, y, t); });
}

double mms2_error(int M, int N, double T) {
  const auto f = mms2_solve(M, N, T);
  double err = 0.0;
  for (int j = 0; j <= M; ++j) {
    for (int i = 0; i <= M; ++i) {
      err = std::max(err, std::abs(f.at(N, i, j) - mms2_v(f.grid.x(i), f.grid.y(j), T)));
    }
  }
  return err;
}

// Temporal error against a fine-step solve on the same mesh, so the spatial
// error cancels.
double mms2_time_error(int M, int N, const RatioField2D& reference) {
  const auto f = mms2_solve(M, N, reference.grid.T);
  const int nr = reference.grid.N;
  double err = 0.0;
  for (int j = 0; j <= M; ++j) {
    for (int i = 0; i <= M; ++i) err = std::max(err, std::abs(f.at(N, i, j) - reference.at(nr, i, j)));
  }
  return err;
}

void add_sweep(ConvergenceTable& t, const std::string& sweep, const std::vector<int>& levels,
               const std::function<ConvergenceRow(int)>& run) {
  double prev = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    ConvergenceRow r = run(levels[l]);
    r.sweep = sweep;
    r.level = static_cast<int>(l);
    const double step = sweep == "space" ? r.h : r.k;
    if (l > 0) {
      const ConvergenceRow& p = t.rows.back();
      const double pstep = sweep == "space" ? p.h : p.k;
      r.order = std::log(prev / r.error) / std::log(pstep / step);
    }
    prev = r.error;
    t.rows.push_back(r);
  }
}

}  // namespace

double ConvergenceTable::fitted_order(std::string_view sweep) const {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.sweep != sweep) continue;
    const double x = std::log(sweep == "space" ? r.h : r.k), y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) fail(ErrorKind::InvalidInput, "sweep needs at least two levels");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::string> convergence_problems() { return {"cn1d-mms", "adi2d-heat", "adi2d-mms"}; }

ConvergenceTable convergence_study(std::string_view problem) {
  ConvergenceTable t;
  t.problem = std::string(problem);
  if (problem == "cn1d-mms") {
    add_sweep(t, "space", {40, 80, 160}, [](int M) {
      return ConvergenceRow{"", 0, 1.0 / M, 1.0 / 2000, mms1_error(M, 2000), 0.0};
    });
    add_sweep(t, "time", {40, 80, 160}, [](int N) {
      return ConvergenceRow{"", 0, 1.0 / 2000, 1.0 / N, mms1_error(2000, N), 0.0};
    });
  } else if (problem == "adi2d-heat") {
    const double T = 0.1;
    add_sweep(t, "space", {10, 20, 40}, [T](int M) {
      return ConvergenceRow{"", 0, 1.0 / M, T / 4000, heat_error(M, 4000, T), 0.0};
    });
    add_sweep(t, "time", {8, 16, 32}, [T](int N) {
      return ConvergenceRow{"", 0, 1.0 / 80, T / N, heat_error(80, N, T), 0.0};
    });
  } else if (problem == "adi2d-mms") {
    const double T = 0.1;
    add_sweep(t, "space", {10, 20, 40}, [T](int M) {
      return ConvergenceRow{"", 0, 1.0 / M, T / 2000, mms2_error(M, 2000, T), 0.0};
    });
    const auto reference = mms2_solve(80, 512, T);
    add_sweep(t, "time", {8, 16, 32}, [T, &reference](int N) {
      return ConvergenceRow{"", 0, 1.0 / 80, T / N, mms2_time_error(80, N, reference), 0.0};
    });
  } else {
    fail(ErrorKind::InvalidParameter, "unknown convergence problem '" + std::string(problem) +
                                          "' (known: cn1d-mms, adi2d-heat, adi2d-mms)");
  }
  return t;
}

void write_convergence_csv(const ConvergenceTable& table, std::ostream& out) {
  out << "sweep,level,h,k,error,order\n";
  for (const auto& r : table.rows) {
    out << r.sweep << ',' << r.level << ',' << fmt(r.h) << ',' << fmt(r.k) << ',' << fmt(r.error)
        << ',' << fmt(r.order) << '\n';
  }
}

double adi_vs_cn_separable_difference(int M, int N) {
  const double T = 0.1;
  auto u0 = [](double x) { return std::sin(kPi * x) + 0.5 * std::sin(3.0 * kPi * x); };
  auto w0 = [](double y) { return std::sin(2.0 * kPi * y) + y * (1.0 - y); };
  RatioCoefficients1D heat;
  heat.zeroth = heat.first = [](double, double) { return 0.0; };
  heat.second = [](double, double) { return 0.5; };
  auto zero = [](double) { return 0.0; };
  const auto fu = solve_parabolic_1d(heat, Grid1D{0.0, 1.0, M, 0.0, T, N}, u0, zero, zero);
  const auto fw = solve_parabolic_1d(heat, Grid1D{0.0, 1.0, M, 0.0, T, N}, w0, zero, zero);
  const Grid2D g{0.0, 1.0, 0.0, 1.0, M, M, 0.0, T, N};
  const auto f2 = solve_parabolic_2d(
      heat_pde(), g, [&](double x, double y) { return u0(x) * w0(y); },
      [](double, double, double) { return 0.0; }, SpatialOrder::Second);
  double diff = 0.0;
  for (int n = 0; n <= N; ++n) {
    for (int j = 0; j <= M; ++j) {
      for (int i = 0; i <= M; ++i) {
        diff = std::max(diff, std::abs(f2.at(n, i, j) - fu.at(n, i) * fw.at(n, j)));
      }
    }
  }
  return diff;
}

}  // namespace fpr
