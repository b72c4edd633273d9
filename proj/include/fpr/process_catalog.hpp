#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>

namespace fpr {

using Vec2 = std::array<double, 2>;

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains_open(double x) const { return x > lo && x < hi; }
};

/// Per-coordinate interval box; only the first `dim` entries are meaningful.
using Box = std::array<Interval, 2>;

/// Sign convention for the tan(beta) term of the transformed Wright-Fisher drift.
///
/// ItoConsistent is what Ito's lemma gives for y = sigmoid(asin(2x - 1)):
///   dy = 1/2 y(1-y)(1 - 2y + tan(beta) + gamma cos(beta)) dt + y(1-y) dW.
/// AsPrinted flips the sign of the tan term.
enum class WfDriftConvention { ItoConsistent, AsPrinted };

/// One SDE dX = S(X) dt + sqrt(sigma(X)) dW in one or two dimensions.
///
/// `sq_diffusion` returns the diagonal of the squared diffusion matrix, i.e.
/// the coefficient that multiplies the second derivative in the Fokker-Planck
/// equation. Two-dimensional models are restricted to diagonal diffusion.
struct SdeModel {
  std::string label;
  int dim = 1;
  std::function<Vec2(const Vec2& x, double t)> drift;
  std::function<Vec2(const Vec2& x)> sq_diffusion;
  Box state_space{};

  // Optional analytic spatial derivatives for dim == 1.
  std::function<double(double x, double t)> drift_dx;
  std::function<double(double x)> sq_diffusion_dx;

  double drift1(double x, double t) const { return drift({x, 0.0}, t)[0]; }
  double sq_diffusion1(double x) const { return sq_diffusion({x, 0.0})[0]; }
};

/// Closed-form transition density anchored at (t0, x0).
struct ClosedFormDensity {
  std::string label;
  int dim = 1;
  double t0 = 0.0;
  Vec2 x0{};
  std::function<double(double t, const Vec2& x)> eval;
  /// Spatial gradient of log(eval).
  std::function<Vec2(double t, const Vec2& x)> log_grad_x;

  double eval1(double t, double x) const { return eval(t, {x, 0.0}); }
  double log_grad1(double t, double x) const { return log_grad_x(t, {x, 0.0})[0]; }
};

/// Strictly monotone bijection applied coordinate-wise.
struct StateTransform {
  std::string label;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> inverse_d1;  // d inverse / dy
  std::function<double(double)> inverse_d2;  // d^2 inverse / dy^2
  Interval domain;
  Interval codomain;
};

// -- models ------------------------------------------------------------------

SdeModel brownian_model(double sigma);
SdeModel ou_model(double beta, double sigma);
SdeModel logistic_brownian_model();
SdeModel wf1d_model(double gamma);
SdeModel wf1d_transformed_model(
    double gamma, WfDriftConvention convention = WfDriftConvention::ItoConsistent);

SdeModel wf2d_model(double h_sel);
/// Returns (transformed 2D Wright-Fisher target, 2D logistic-Brownian proposal).
std::pair<SdeModel, SdeModel> wf2d_models(
    double h_sel, WfDriftConvention convention = WfDriftConvention::ItoConsistent);

// -- densities ---------------------------------------------------------------

/// Gaussian O-U transition density; beta == 0 is the Brownian case.
ClosedFormDensity ou_transition_density(double beta, double sigma, double x0,
                                        double t0 = 0.0);
ClosedFormDensity logistic_brownian_density(double t0, double y0);
ClosedFormDensity bivariate_logistic_density(double t0, const Vec2& y0,
                                             double rho = 0.0);

// -- transforms --------------------------------------------------------------

StateTransform identity_transform();
/// g(x) = 1 / (1 + exp(-x)), R -> (0, 1).
StateTransform sigmoid_transform();
/// f(x) = sigmoid(asin(2x - 1)), (0, 1) -> (sigmoid(-pi/2), sigmoid(pi/2)).
StateTransform arcsine_logit_transform();

ClosedFormDensity transform_density(const ClosedFormDensity& base,
                                    const StateTransform& map);

double logit(double y);
double sigmoid(double x);

// -- diagnostics -------------------------------------------------------------

struct AronsonOptions {
  double eigen_floor = 1e-8;
  double drift_cap = 1e6;
  /// Drift counts as growing when its sup at the grid edge exceeds this
  /// multiple of the sup over the inner half of the grid.
  double edge_growth_ratio = 1.5;
  double t = 0.0;
};

struct AronsonReport {
  bool drift_bounded = true;
  double sup_drift = 0.0;
  double sup_drift_inner = 0.0;
  bool diffusion_nondegenerate = true;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  /// Smallest lambda with lambda^-1 <= eig <= lambda over the grid.
  double lambda = 0.0;
};

AronsonReport check_aronson_preconditions(const SdeModel& model,
                                          std::span<const Vec2> grid,
                                          const AronsonOptions& options = {});

}  // namespace fpr
