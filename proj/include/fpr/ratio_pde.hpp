#pragma once

#include <functional>

#include "fpr/process_catalog.hpp"

namespace fpr {

/// Coefficients of dV/dt = zeroth V + first dV/dx + second d2V/dx2.
struct RatioCoefficients1D {
  std::function<double(double x, double t)> zeroth;
  std::function<double(double x, double t)> first;
  std::function<double(double x, double t)> second;
  double valid_t_min = 0.0;
};

/// Logit-coordinate Wright-Fisher ratio PDE
///   dV/dt = reaction_factor * eps V + cx dV/dx + dy dV/dy + alpha (V_xx + V_yy).
struct RatioCoefficients2D {
  std::function<double(double x, double y, double t)> eps;
  std::function<double(double x, double y, double t)> cx;
  std::function<double(double x, double y, double t)> dy;
  double alpha = 0.5;
  double reaction_factor = 2.0;
  Vec2 initial_logits{};
  double rho = 0.0;
  double h_sel = 0.0;
  double valid_t_min = 0.0;
};

struct BuildOptions {
  double valid_t_min = 0.0;
  /// Central-difference step for drifts/diffusions lacking analytic derivatives.
  double fd_step = 1e-6;
  double diffusion_match_tol = 1e-10;
  int diffusion_check_points = 100;
};

/// Generic one-dimensional builder. `proposal` has the closed-form density;
/// `target` is the process to be sampled. Both must share sq_diffusion.
RatioCoefficients1D build_ratio_pde_1d(const SdeModel& target, const SdeModel& proposal,
                                       const ClosedFormDensity& proposal_density,
                                       const BuildOptions& options = {});

/// Hard-coded Wright-Fisher coefficients in the y = f(x) coordinate.
RatioCoefficients1D wf1d_ratio_coefficients(
    double gamma, double y0, double t0 = 0.0,
    WfDriftConvention convention = WfDriftConvention::ItoConsistent);

/// Hard-coded O-U (target) versus Brownian (proposal) coefficients.
RatioCoefficients1D ou_ratio_coefficients(double beta, double sigma, double x0,
                                          double t0 = 0.0);

RatioCoefficients2D wf2d_ratio_coefficients(
    double h_sel, const Vec2& beta0, double rho = 0.0, double t0 = 0.0,
    WfDriftConvention convention = WfDriftConvention::ItoConsistent);

/// Throws TrigSingularity when [lo, hi] contains an odd multiple of pi/2.
void check_trig_safe_interval(double lo, double hi);

}  // namespace fpr
