#include "fpr/ratio_pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fpr/errors.hpp"

namespace fpr {

namespace {

double elapsed(double t, double t0) {
  const double tau = t - t0;
  if (!(tau > 0.0)) {
    fail(ErrorKind::SingularTime,
         "ratio coefficients are singular at t <= t0 (t=" + std::to_string(t) + ")");
  }
  return tau;
}

void check_cos(double c, double at) {
  if (std::abs(c) < 1e-12) {
    fail(ErrorKind::TrigSingularity,
         "logit coordinate at odd multiple of pi/2: " + std::to_string(at));
  }
}

/// Interior probe points used to compare diffusion coefficients.
std::vector<double> probe_points(const SdeModel& model, double centre, int count) {
  const Interval& box = model.state_space[0];
  double lo = std::isfinite(box.lo) ? box.lo : centre - 5.0;
  double hi = std::isfinite(box.hi) ? box.hi : centre + 5.0;
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * (i + 1.0) / (count + 1.0);
  }
  return out;
}

}  // namespace

void check_trig_safe_interval(double lo, double hi) {
  const double half_pi = std::numbers::pi / 2.0;
  // Odd multiples of pi/2 are (2k + 1) pi/2; find the first one >= lo.
  const double k = std::ceil((lo / half_pi - 1.0) / 2.0);
  const double first = (2.0 * k + 1.0) * half_pi;
  if (first <= hi) {
    fail(ErrorKind::TrigSingularity,
         "logit range [" + std::to_string(lo) + ", " + std::to_string(hi) +
             "] contains an odd multiple of pi/2");
  }
}

RatioCoefficients1D build_ratio_pde_1d(const SdeModel& target, const SdeModel& proposal,
                                       const ClosedFormDensity& proposal_density,
                                       const BuildOptions& options) {
  if (target.dim != 1 || proposal.dim != 1 || proposal_density.dim != 1) {
    fail(ErrorKind::IncompatibleModels, "generic builder supports dim == 1 only");
  }
  for (double x : probe_points(proposal, proposal_density.x0[0],
                               options.diffusion_check_points)) {
    const double a = target.sq_diffusion1(x);
    const double b = proposal.sq_diffusion1(x);
    if (std::abs(a - b) > options.diffusion_match_tol * std::max(1.0, std::abs(b))) {
      fail(ErrorKind::IncompatibleModels,
           "target and proposal diffusion differ at x=" + std::to_string(x));
    }
  }

  const double step = options.fd_step;
  auto drift_dx = [step](const SdeModel& m) -> std::function<double(double, double)> {
    if (m.drift_dx) return m.drift_dx;
    return [m, step](double x, double t) {
      return (m.drift1(x + step, t) - m.drift1(x - step, t)) / (2.0 * step);
    };
  };
  std::function<double(double)> diff_dx = proposal.sq_diffusion_dx;
  if (!diff_dx) {
    diff_dx = [proposal, step](double x) {
      return (proposal.sq_diffusion1(x + step) - proposal.sq_diffusion1(x - step)) /
             (2.0 * step);
    };
  }

  // Proposal drift S1, target drift S2, shared squared diffusion sigma:
  //   zeroth = d/dx (S1 - S2) + (S1 - S2) d/dx log P1
  //   first  = sigma d/dx log P1 + d/dx sigma - S2
  //   second = sigma / 2
  RatioCoefficients1D c;
  c.valid_t_min = options.valid_t_min;
  const auto s1_dx = drift_dx(proposal);
  const auto s2_dx = drift_dx(target);
  c.zeroth = [target, proposal, proposal_density, s1_dx, s2_dx](double x, double t) {
    const double diff = proposal.drift1(x, t) - target.drift1(x, t);
    return s1_dx(x, t) - s2_dx(x, t) + diff * proposal_density.log_grad1(t, x);
  };
  c.first = [target, proposal, proposal_density, diff_dx](double x, double t) {
    return proposal.sq_diffusion1(x) * proposal_density.log_grad1(t, x) + diff_dx(x) -
           target.drift1(x, t);
  };
  c.second = [proposal](double x, double) { return 0.5 * proposal.sq_diffusion1(x); };
  return c;
}

RatioCoefficients1D wf1d_ratio_coefficients(double gamma, double y0, double t0,
                                            WfDriftConvention convention) {
  if (!(y0 > 0.0 && y0 < 1.0)) fail(ErrorKind::InvalidParameter, "y0 must lie in (0, 1)");
  const double s = convention == WfDriftConvention::ItoConsistent ? 1.0 : -1.0;
  const double beta0 = logit(y0);

  RatioCoefficients1D c;
  c.valid_t_min = t0;
  c.zeroth = [gamma, beta0, t0, s](double y, double t) {
    const double tau = elapsed(t, t0);
    const double b = logit(y);
    const double cb = std::cos(b);
    check_cos(cb, b);
    return 0.5 * (gamma * std::sin(b) - s / (cb * cb) +
                  (b - beta0) * (gamma * cb + s * std::tan(b)) / tau);
  };
  c.first = [gamma, beta0, t0, s](double y, double t) {
    const double tau = elapsed(t, t0);
    const double b = logit(y);
    const double cb = std::cos(b);
    check_cos(cb, b);
    return 0.5 * y * (1.0 - y) *
           (1.0 - 2.0 * y + 2.0 * (beta0 - b) / tau - s * std::tan(b) - gamma * cb);
  };
  c.second = [](double y, double) {
    const double p = y * (1.0 - y);
    return 0.5 * p * p;
  };
  return c;
}

RatioCoefficients1D ou_ratio_coefficients(double beta, double sigma, double x0, double t0) {
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidParameter, "sigma must be positive");
  const double s2 = sigma * sigma;
  RatioCoefficients1D c;
  c.valid_t_min = t0;
  c.zeroth = [beta, s2, x0, t0](double x, double t) {
    const double var1 = s2 * elapsed(t, t0);
    return beta / var1 * (var1 - x * (x - x0));
  };
  c.first = [beta, s2, x0, t0](double x, double t) {
    const double var1 = s2 * elapsed(t, t0);
    return (beta - s2 / var1) * x + s2 * x0 / var1;
  };
  c.second = [s2](double, double) { return 0.5 * s2; };
  return c;
}

RatioCoefficients2D wf2d_ratio_coefficients(double h_sel, const Vec2& beta0, double rho,
                                            double t0, WfDriftConvention convention) {
  if (!(std::abs(rho) < 1.0)) fail(ErrorKind::InvalidParameter, "|rho| must be < 1");
  const bool ito = convention == WfDriftConvention::ItoConsistent;
  const double s = ito ? 1.0 : -1.0;
  // Cross-correlation weight in the log-density gradient. Differentiating the
  // bivariate Gaussian gives rho; the AsPrinted variant keeps 2 rho.
  const double kr = ito ? rho : 2.0 * rho;
  const double denom = 1.0 - rho * rho;

  RatioCoefficients2D c;
  c.initial_logits = beta0;
  c.rho = rho;
  c.h_sel = h_sel;
  c.valid_t_min = t0;

  c.eps = [h_sel, beta0, kr, denom, t0, s](double x, double y, double t) {
    const double d = elapsed(t, t0) * denom;
    const double cx = std::cos(x), cy = std::cos(y);
    check_cos(cx, x);
    check_cos(cy, y);
    const double sx = std::sin(x), sy = std::sin(y);
    const double u = x - beta0[0], v = y - beta0[1];
    return 0.25 * (-s * (1.0 / (cx * cx) + 1.0 / (cy * cy)) +
                   0.5 * h_sel * (sx + sy + 2.0 * sx * sy) +
                   (u - kr * v) / d * (0.5 * h_sel * (1.0 + sy) * cx + s * std::tan(x)) +
                   (v - kr * u) / d * (0.5 * h_sel * (1.0 + sx) * cy + s * std::tan(y)));
  };
  c.cx = [h_sel, beta0, kr, denom, t0, s](double x, double y, double t) {
    const double d = elapsed(t, t0) * denom;
    check_cos(std::cos(x), x);
    const double u = x - beta0[0], v = y - beta0[1];
    return -(u - kr * v) / d - 0.5 * s * std::tan(x) -
           0.25 * h_sel * (1.0 + std::sin(y)) * std::cos(x);
  };
  c.dy = [h_sel, beta0, kr, denom, t0, s](double x, double y, double t) {
    const double d = elapsed(t, t0) * denom;
    check_cos(std::cos(y), y);
    const double u = x - beta0[0], v = y - beta0[1];
    return -(v - kr * u) / d - 0.5 * s * std::tan(y) -
           0.25 * h_sel * (1.0 + std::sin(x)) * std::cos(y);
  };
  return c;
}

}  // namespace fpr
