#include "fpr/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <string>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "fpr/errors.hpp"
#include "fpr/io.hpp"
#include "fpr/rng.hpp"

namespace fpr {

GaussianMoments ou_moments(double beta, double sigma, double x0, double t) {
  if (!(t > 0.0)) fail(ErrorKind::Domain, "O-U moments need t > 0");
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidParameter, "sigma must be positive");
  if (beta < 0.0) fail(ErrorKind::InvalidParameter, "beta must be >= 0");
  const double s2 = sigma * sigma;
  if (beta == 0.0) return {x0, s2 * t};
  return {x0 * std::exp(-beta * t), s2 * -std::expm1(-2.0 * beta * t) / (2.0 * beta)};
}

double ou_exact_ratio(double beta, double sigma, double x0, double x, double t) {
  const GaussianMoments target = ou_moments(beta, sigma, x0, t);
  if (beta == 0.0) return 1.0;
  const double var1 = sigma * sigma * t;
  const double d2 = x - target.mean, d1 = x - x0;
  return std::sqrt(var1 / target.variance) *
         std::exp(-0.5 * (d2 * d2 / target.variance - d1 * d1 / var1));
}

double ou_bound(double beta, double x_max, double x0, double T) {
  return std::exp(0.5 * beta * (x_max * x_max - x0 * x0 + T));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double EmpiricalDistribution::standard_error() const {
  return std::sqrt(variance / static_cast<double>(count()));
}

EmpiricalDistribution EmpiricalDistribution::from(std::vector<double> samples) {
  if (samples.empty()) fail(ErrorKind::InvalidInput, "empirical distribution needs samples");
  double sum = 0.0;
  for (double v : samples) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "non-finite sample");
    sum += v;
  }
  EmpiricalDistribution d;
  d.mean = sum / samples.size();
  double ss = 0.0;
  for (double v : samples) ss += (v - d.mean) * (v - d.mean);
  d.variance = samples.size() > 1 ? ss / (samples.size() - 1) : 0.0;
  std::sort(samples.begin(), samples.end());
  d.sorted = std::move(samples);
  return d;
}

void write_distribution_csv(const EmpiricalDistribution& d, std::ostream& out,
                            const char* column) {
  out << column << '\n';
  for (double v : d.sorted) out << fmt(v) << '\n';
}

EulerResult euler_maruyama(const SdeModel& model, double x0, double t_end, double dt,
                           std::size_t n_paths, std::uint64_t seed,
                           const EulerOptions& options) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidParameter, "dt must be positive");
  if (n_paths < 1) fail(ErrorKind::InvalidParameter, "n_paths must be >= 1");
  if (model.dim != 1) fail(ErrorKind::InvalidParameter, "Euler-Maruyama oracle is 1D only");
  if (!(t_end > 0.0)) fail(ErrorKind::InvalidParameter, "t_end must be positive");

  const long steps = std::max(1L, std::lround(t_end / dt));
  const double h = t_end / steps;
  const double sqrt_h = std::sqrt(h);
  const Interval box = model.state_space[0];
  const double lo = box.lo + options.clip_eps, hi = box.hi - options.clip_eps;

  // NaN marks an absorbed path.
  std::vector<double> finals(n_paths);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::size_t failure_path = 0;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t p; !failed && (p = next.fetch_add(1)) < n_paths;) {
      CounterRng rng(seed, StreamRole::Simulation, p);
      double x = x0;
      bool absorbed = false;
      try {
        for (long s = 0; s < steps; ++s) {
          const double t = s * h;
          const double drift = model.drift1(x, t);
          const double diff = std::sqrt(std::max(0.0, model.sq_diffusion1(x)));
          x += drift * h + diff * sqrt_h * rng.normal();
          if (std::isnan(x)) fail(ErrorKind::SimulationBlowup, "NaN state");
          if (options.policy == BoundaryPolicy::Clip) {
            x = std::clamp(x, lo, hi);
          } else if (options.policy == BoundaryPolicy::Absorb && !box.contains_open(x)) {
            absorbed = true;
            break;
          }
        }
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failed.exchange(true)) {
          failure = e.what();
          failure_path = p;
        }
        return;
      }
      finals[p] = absorbed ? std::numeric_limits<double>::quiet_NaN() : x;
    }
  };
  const int jobs = std::max(1, options.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed) {
    fail(ErrorKind::SimulationBlowup,
         "Euler-Maruyama path " + std::to_string(failure_path) + ": " + failure);
  }

  EulerResult r;
  r.n_paths = n_paths;
  std::vector<double> alive;
  alive.reserve(n_paths);
  for (double v : finals) {
    if (std::isnan(v)) {
      ++r.absorbed;
    } else {
      alive.push_back(v);
    }
  }
  if (alive.empty()) fail(ErrorKind::SimulationBlowup, "every Euler-Maruyama path was absorbed");
  r.distribution = EmpiricalDistribution::from(std::move(alive));
  return r;
}

namespace {
void check_ks_input(const EmpiricalDistribution& d) {
  if (d.count() < 10) fail(ErrorKind::InvalidInput, "KS statistic needs at least 10 samples");
}
}  // namespace

double ks_statistic(const EmpiricalDistribution& a, const std::function<double(double)>& cdf) {
  check_ks_input(a);
  const double n = static_cast<double>(a.count());
  double d = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i) {
    const double f = cdf(a.sorted[i]);
    if (!std::isfinite(f)) fail(ErrorKind::InvalidInput, "CDF returned a non-finite value");
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double ks_statistic(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  check_ks_input(a);
  check_ks_input(b);
  const auto& x = a.sorted;
  const auto& y = b.sorted;
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace fpr
