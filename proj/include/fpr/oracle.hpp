#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fpr/process_catalog.hpp"

namespace fpr {

/// Closed-form P2/P1 for an O-U target against a Brownian proposal, both
/// started at x0 at time 0 with the same sigma. beta == 0 returns 1.
double ou_exact_ratio(double beta, double sigma, double x0, double x, double t);

/// C(beta) = exp((beta/2)(x_max^2 - x0^2 + T)).
double ou_bound(double beta, double x_max, double x0, double T);

/// Mean and variance of the O-U marginal at time t.
struct GaussianMoments {
  double mean = 0.0;
  double variance = 0.0;
};
GaussianMoments ou_moments(double beta, double sigma, double x0, double t);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

struct EmpiricalDistribution {
  std::vector<double> sorted;
  double mean = 0.0;
  double variance = 0.0;  // unbiased

  std::size_t count() const { return sorted.size(); }
  double standard_error() const;

  /// Throws InvalidInput on empty input or non-finite values.
  static EmpiricalDistribution from(std::vector<double> samples);
};

void write_distribution_csv(const EmpiricalDistribution& d, std::ostream& out,
                            const char* column = "value");

enum class BoundaryPolicy { None, Clip, Absorb };

struct EulerOptions {
  BoundaryPolicy policy = BoundaryPolicy::None;
  /// Clip keeps the state in [lo + eps, hi - eps] of the model's state space.
  double clip_eps = 1e-9;
  int jobs = 1;
};

struct EulerResult {
  EmpiricalDistribution distribution;  // surviving paths
  std::size_t n_paths = 0;
  std::size_t absorbed = 0;
};

/// Euler-Maruyama marginal at t_end for a one-dimensional model. Each path
/// uses its own random stream, so results do not depend on `jobs`.
EulerResult euler_maruyama(const SdeModel& model, double x0, double t_end, double dt,
                           std::size_t n_paths, std::uint64_t seed,
                           const EulerOptions& options = {});

/// One-sample Kolmogorov-Smirnov distance against a CDF.
double ks_statistic(const EmpiricalDistribution& a, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov distance.
double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

}  // namespace fpr
