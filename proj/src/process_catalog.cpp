#include "fpr/process_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpr/errors.hpp"

namespace fpr {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorKind::InvalidParameter, std::string(name) + " must be positive");
  }
}

void require_unit_interior(double y, const char* who) {
  if (!(y > 0.0 && y < 1.0)) {
    fail(ErrorKind::BoundaryEvaluation,
         std::string(who) + ": state must lie strictly inside (0, 1), got " +
             std::to_string(y));
  }
}

double tan_sign(WfDriftConvention convention) {
  return convention == WfDriftConvention::ItoConsistent ? 1.0 : -1.0;
}

Box unit_box() { return {Interval{0.0, 1.0}, Interval{0.0, 1.0}}; }

}  // namespace

double logit(double y) { return std::log(y / (1.0 - y)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SdeModel brownian_model(double sigma) {
  require_positive(sigma, "sigma");
  SdeModel m;
  m.label = "brownian";
  m.drift = [](const Vec2&, double) { return Vec2{0.0, 0.0}; };
  const double s2 = sigma * sigma;
  m.sq_diffusion = [s2](const Vec2&) { return Vec2{s2, 0.0}; };
  m.drift_dx = [](double, double) { return 0.0; };
  m.sq_diffusion_dx = [](double) { return 0.0; };
  return m;
}

SdeModel ou_model(double beta, double sigma) {
  require_positive(sigma, "sigma");
  if (!(beta >= 0.0)) fail(ErrorKind::InvalidParameter, "beta must be >= 0");
  SdeModel m;
  m.label = "ou";
  m.drift = [beta](const Vec2& x, double) { return Vec2{-beta * x[0], 0.0}; };
  const double s2 = sigma * sigma;
  m.sq_diffusion = [s2](const Vec2&) { return Vec2{s2, 0.0}; };
  m.drift_dx = [beta](double, double) { return -beta; };
  m.sq_diffusion_dx = [](double) { return 0.0; };
  return m;
}

SdeModel logistic_brownian_model() {
  SdeModel m;
  m.label = "logistic-brownian";
  m.state_space = unit_box();
  m.drift = [](const Vec2& y, double) {
    require_unit_interior(y[0], "logistic-brownian drift");
    const double p = y[0] * (1.0 - y[0]);
    return Vec2{0.5 * p * (1.0 - 2.0 * y[0]), 0.0};
  };
  m.sq_diffusion = [](const Vec2& y) {
    require_unit_interior(y[0], "logistic-brownian diffusion");
    const double p = y[0] * (1.0 - y[0]);
    return Vec2{p * p, 0.0};
  };
  // d/dy [1/2 y(1-y)(1-2y)] = 1/2 (1 - 6y + 6y^2)
  m.drift_dx = [](double y, double) { return 0.5 * (1.0 - 6.0 * y + 6.0 * y * y); };
  m.sq_diffusion_dx = [](double y) {
    return 2.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
  };
  return m;
}

SdeModel wf1d_model(double gamma) {
  SdeModel m;
  m.label = "wf1d";
  m.state_space = unit_box();
  m.drift = [gamma](const Vec2& x, double) {
    require_unit_interior(x[0], "wf1d drift");
    return Vec2{gamma * x[0] * (1.0 - x[0]), 0.0};
  };
  m.sq_diffusion = [](const Vec2& x) {
    require_unit_interior(x[0], "wf1d diffusion");
    return Vec2{x[0] * (1.0 - x[0]), 0.0};
  };
  m.drift_dx = [gamma](double x, double) { return gamma * (1.0 - 2.0 * x); };
  m.sq_diffusion_dx = [](double x) { return 1.0 - 2.0 * x; };
  return m;
}

SdeModel wf1d_transformed_model(double gamma, WfDriftConvention convention) {
  const double s = tan_sign(convention);
  SdeModel m = logistic_brownian_model();
  m.label = "wf1d-transformed";
  m.drift = [gamma, s](const Vec2& y, double) {
    require_unit_interior(y[0], "wf1d-transformed drift");
    const double b = logit(y[0]);
    const double p = y[0] * (1.0 - y[0]);
    return Vec2{0.5 * p * (1.0 - 2.0 * y[0] + s * std::tan(b) + gamma * std::cos(b)),
                0.0};
  };
  // With u = 1 - 2y + s tan(b) + gamma cos(b) and db/dy = 1/p:
  //   d/dy [p u / 2] = ((1 - 2y) u + p du/dy) / 2,
  //   p du/dy = -2p + s sec^2(b) - gamma sin(b).
  m.drift_dx = [gamma, s](double y, double) {
    const double b = logit(y);
    const double p = y * (1.0 - y);
    const double c = std::cos(b);
    const double u = 1.0 - 2.0 * y + s * std::tan(b) + gamma * c;
    return 0.5 * ((1.0 - 2.0 * y) * u - 2.0 * p + s / (c * c) - gamma * std::sin(b));
  };
  return m;
}

SdeModel wf2d_model(double h_sel) {
  SdeModel m;
  m.label = "wf2d";
  m.dim = 2;
  m.state_space = unit_box();
  m.drift = [h_sel](const Vec2& x, double) {
    require_unit_interior(x[0], "wf2d drift");
    require_unit_interior(x[1], "wf2d drift");
    return Vec2{h_sel * x[0] * (1.0 - x[0]) * x[1], h_sel * x[1] * (1.0 - x[1]) * x[0]};
  };
  m.sq_diffusion = [](const Vec2& x) {
    require_unit_interior(x[0], "wf2d diffusion");
    require_unit_interior(x[1], "wf2d diffusion");
    return Vec2{x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1])};
  };
  return m;
}

std::pair<SdeModel, SdeModel> wf2d_models(double h_sel, WfDriftConvention convention) {
  const double s = tan_sign(convention);
  auto sq = [](const Vec2& y) {
    require_unit_interior(y[0], "wf2d-transformed diffusion");
    require_unit_interior(y[1], "wf2d-transformed diffusion");
    const double p0 = y[0] * (1.0 - y[0]);
    const double p1 = y[1] * (1.0 - y[1]);
    return Vec2{p0 * p0, p1 * p1};
  };

  SdeModel target;
  target.label = "wf2d-transformed";
  target.dim = 2;
  target.state_space = unit_box();
  target.sq_diffusion = sq;
  target.drift = [h_sel, s](const Vec2& y, double) {
    require_unit_interior(y[0], "wf2d-transformed drift");
    require_unit_interior(y[1], "wf2d-transformed drift");
    const double b0 = logit(y[0]);
    const double b1 = logit(y[1]);
    auto component = [&](double yi, double bi, double bj) {
      return 0.5 * yi * (1.0 - yi) *
             (1.0 - 2.0 * yi + s * std::tan(bi) +
              0.5 * h_sel * (1.0 + std::sin(bj)) * std::cos(bi));
    };
    return Vec2{component(y[0], b0, b1), component(y[1], b1, b0)};
  };

  SdeModel proposal;
  proposal.label = "logistic-brownian-2d";
  proposal.dim = 2;
  proposal.state_space = unit_box();
  proposal.sq_diffusion = sq;
  proposal.drift = [](const Vec2& y, double) {
    require_unit_interior(y[0], "logistic-brownian-2d drift");
    require_unit_interior(y[1], "logistic-brownian-2d drift");
    return Vec2{0.5 * y[0] * (1.0 - y[0]) * (1.0 - 2.0 * y[0]),
                0.5 * y[1] * (1.0 - y[1]) * (1.0 - 2.0 * y[1])};
  };
  return {std::move(target), std::move(proposal)};
}

ClosedFormDensity ou_transition_density(double beta, double sigma, double x0, double t0) {
  require_positive(sigma, "sigma");
  if (!(beta >= 0.0)) fail(ErrorKind::InvalidParameter, "beta must be >= 0");

  // Mean and variance after elapsed time dt; the expm1 form keeps small beta*dt
  // accurate and reduces to sigma^2 dt at beta == 0.
  auto moments = [beta, sigma, x0, t0](double t) {
    const double dt = t - t0;
    if (!(dt > 0.0)) fail(ErrorKind::InvalidTime, "density requires t > t0");
    if (beta == 0.0) return std::pair{x0, sigma * sigma * dt};
    const double var = -sigma * sigma * std::expm1(-2.0 * beta * dt) / (2.0 * beta);
    return std::pair{x0 * std::exp(-beta * dt), var};
  };

  ClosedFormDensity d;
  d.label = beta == 0.0 ? "brownian-density" : "ou-density";
  d.t0 = t0;
  d.x0 = {x0, 0.0};
  d.eval = [moments](double t, const Vec2& x) {
    const auto [mean, var] = moments(t);
    const double z = x[0] - mean;
    return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * kPi * var);
  };
  d.log_grad_x = [moments](double t, const Vec2& x) {
    const auto [mean, var] = moments(t);
    return Vec2{-(x[0] - mean) / var, 0.0};
  };
  return d;
}

ClosedFormDensity logistic_brownian_density(double t0, double y0) {
  if (!(y0 > 0.0 && y0 < 1.0)) {
    fail(ErrorKind::InvalidParameter, "y0 must lie in (0, 1)");
  }
  const double beta0 = logit(y0);
  ClosedFormDensity d;
  d.label = "logistic-brownian-density";
  d.t0 = t0;
  d.x0 = {y0, 0.0};
  d.eval = [t0, beta0](double t, const Vec2& y) {
    const double dt = t - t0;
    if (!(dt > 0.0)) fail(ErrorKind::InvalidTime, "density requires t > t0");
    if (!(y[0] > 0.0 && y[0] < 1.0)) return 0.0;
    const double u = logit(y[0]) - beta0;
    return kInvSqrt2Pi / std::sqrt(dt) * std::exp(-0.5 * u * u / dt) /
           (y[0] * (1.0 - y[0]));
  };
  d.log_grad_x = [t0, beta0](double t, const Vec2& y) {
    const double dt = t - t0;
    if (!(dt > 0.0)) fail(ErrorKind::InvalidTime, "density requires t > t0");
    require_unit_interior(y[0], "logistic-brownian log-gradient");
    const double p = y[0] * (1.0 - y[0]);
    const double u = logit(y[0]) - beta0;
    return Vec2{-u / (dt * p) - (1.0 - 2.0 * y[0]) / p, 0.0};
  };
  return d;
}

ClosedFormDensity bivariate_logistic_density(double t0, const Vec2& y0, double rho) {
  if (!(std::abs(rho) < 1.0)) fail(ErrorKind::InvalidParameter, "|rho| must be < 1");
  for (double v : y0) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorKind::InvalidParameter, "y0 must lie in (0,1)^2");
  }
  const Vec2 beta0{logit(y0[0]), logit(y0[1])};
  const double one_m_r2 = 1.0 - rho * rho;

  ClosedFormDensity d;
  d.label = "bivariate-logistic-density";
  d.dim = 2;
  d.t0 = t0;
  d.x0 = y0;
  d.eval = [t0, beta0, rho, one_m_r2](double t, const Vec2& y) {
    const double dt = t - t0;
    if (!(dt > 0.0)) fail(ErrorKind::InvalidTime, "density requires t > t0");
    if (!(y[0] > 0.0 && y[0] < 1.0 && y[1] > 0.0 && y[1] < 1.0)) return 0.0;
    const double u = logit(y[0]) - beta0[0];
    const double v = logit(y[1]) - beta0[1];
    const double q = u * u + v * v - 2.0 * rho * u * v;
    const double jac = y[0] * (1.0 - y[0]) * y[1] * (1.0 - y[1]);
    return std::exp(-q / (2.0 * dt * one_m_r2)) /
           (2.0 * kPi * dt * std::sqrt(one_m_r2) * jac);
  };
  d.log_grad_x = [t0, beta0, rho, one_m_r2](double t, const Vec2& y) {
    const double dt = t - t0;
    if (!(dt > 0.0)) fail(ErrorKind::InvalidTime, "density requires t > t0");
    require_unit_interior(y[0], "bivariate-logistic log-gradient");
    require_unit_interior(y[1], "bivariate-logistic log-gradient");
    const double u = logit(y[0]) - beta0[0];
    const double v = logit(y[1]) - beta0[1];
    const double p0 = y[0] * (1.0 - y[0]);
    const double p1 = y[1] * (1.0 - y[1]);
    return Vec2{-(u - rho * v) / (dt * one_m_r2 * p0) - (1.0 - 2.0 * y[0]) / p0,
                -(v - rho * u) / (dt * one_m_r2 * p1) - (1.0 - 2.0 * y[1]) / p1};
  };
  return d;
}

StateTransform identity_transform() {
  StateTransform m;
  m.label = "identity";
  m.forward = [](double x) { return x; };
  m.inverse = [](double y) { return y; };
  m.inverse_d1 = [](double) { return 1.0; };
  m.inverse_d2 = [](double) { return 0.0; };
  return m;
}

StateTransform sigmoid_transform() {
  StateTransform m;
  m.label = "sigmoid";
  m.forward = sigmoid;
  m.inverse = logit;
  m.inverse_d1 = [](double y) { return 1.0 / (y * (1.0 - y)); };
  m.inverse_d2 = [](double y) {
    const double p = y * (1.0 - y);
    return -(1.0 - 2.0 * y) / (p * p);
  };
  m.codomain = {0.0, 1.0};
  return m;
}

StateTransform arcsine_logit_transform() {
  StateTransform m;
  m.label = "arcsine-logit";
  m.forward = [](double x) { return sigmoid(std::asin(2.0 * x - 1.0)); };
  m.inverse = [](double y) { return 0.5 * (1.0 + std::sin(logit(y))); };
  m.inverse_d1 = [](double y) {
    const double p = y * (1.0 - y);
    return 0.5 * std::cos(logit(y)) / p;
  };
  m.inverse_d2 = [](double y) {
    const double p = y * (1.0 - y);
    const double b = logit(y);
    return -0.5 * (std::sin(b) + std::cos(b) * (1.0 - 2.0 * y)) / (p * p);
  };
  m.domain = {0.0, 1.0};
  m.codomain = {sigmoid(-kPi / 2.0), sigmoid(kPi / 2.0)};
  return m;
}

ClosedFormDensity transform_density(const ClosedFormDensity& base,
                                    const StateTransform& map) {
  ClosedFormDensity d;
  d.label = base.label + "|" + map.label;
  d.dim = base.dim;
  d.t0 = base.t0;
  d.x0 = base.x0;
  for (int i = 0; i < base.dim; ++i) d.x0[i] = map.forward(base.x0[i]);

  const int dim = base.dim;
  d.eval = [base, map, dim](double t, const Vec2& y) {
    Vec2 x{};
    double jac = 1.0;
    for (int i = 0; i < dim; ++i) {
      if (!map.codomain.contains_open(y[i])) return 0.0;
      x[i] = map.inverse(y[i]);
      jac *= std::abs(map.inverse_d1(y[i]));
    }
    return base.eval(t, x) * jac;
  };
  d.log_grad_x = [base, map, dim](double t, const Vec2& y) {
    Vec2 x{};
    for (int i = 0; i < dim; ++i) {
      if (!map.codomain.contains_open(y[i])) {
        fail(ErrorKind::Domain, "transformed log-gradient outside codomain");
      }
      x[i] = map.inverse(y[i]);
    }
    const Vec2 g = base.log_grad_x(t, x);
    Vec2 out{};
    for (int i = 0; i < dim; ++i) {
      const double d1 = map.inverse_d1(y[i]);
      out[i] = g[i] * d1 + map.inverse_d2(y[i]) / d1;
    }
    return out;
  };
  return d;
}

AronsonReport check_aronson_preconditions(const SdeModel& model,
                                          std::span<const Vec2> grid,
                                          const AronsonOptions& options) {
  if (grid.empty()) fail(ErrorKind::InvalidInput, "aronson check needs a non-empty grid");

  Vec2 lo{grid[0]}, hi{grid[0]};
  for (const auto& p : grid) {
    for (int i = 0; i < model.dim; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }

  AronsonReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.max_eigenvalue = -std::numeric_limits<double>::infinity();
  for (const auto& p : grid) {
    const Vec2 s = model.drift(p, options.t);
    const Vec2 e = model.sq_diffusion(p);
    double norm2 = 0.0;
    bool inner = true;
    for (int i = 0; i < model.dim; ++i) {
      norm2 += s[i] * s[i];
      r.min_eigenvalue = std::min(r.min_eigenvalue, e[i]);
      r.max_eigenvalue = std::max(r.max_eigenvalue, e[i]);
      const double mid = 0.5 * (lo[i] + hi[i]);
      inner = inner && std::abs(p[i] - mid) <= 0.25 * (hi[i] - lo[i]);
    }
    const double norm = std::sqrt(norm2);
    r.sup_drift = std::max(r.sup_drift, norm);
    if (inner) r.sup_drift_inner = std::max(r.sup_drift_inner, norm);
  }

  const bool growing = r.sup_drift > options.edge_growth_ratio * r.sup_drift_inner &&
                       r.sup_drift > 1e-12;
  r.drift_bounded = std::isfinite(r.sup_drift) && r.sup_drift <= options.drift_cap && !growing;
  r.diffusion_nondegenerate = r.min_eigenvalue >= options.eigen_floor;
  r.lambda = r.min_eigenvalue > 0.0 ? std::max(r.max_eigenvalue, 1.0 / r.min_eigenvalue)
                                    : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace fpr
