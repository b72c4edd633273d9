#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fpr/errors.hpp"
#include "fpr/oracle.hpp"
#include "fpr/process_catalog.hpp"
#include "fpr/rng.hpp"

namespace fpr {
namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  CounterRng rng(seed, StreamRole::Simulation, 0);
  std::vector<double> v(n);
  for (double& x : v) x = shift + rng.normal();
  return v;
}

TEST(OuExactRatio, ZeroBetaIsOne) {
  for (double x : {-3.0, 0.0, 0.7, 5.0}) {
    EXPECT_EQ(ou_exact_ratio(0.0, 1.0, 0.0, x, 0.3), 1.0);
  }
  EXPECT_NEAR(ou_exact_ratio(1e-12, 1.0, 0.2, 1.5, 0.7), 1.0, 1e-9);
  EXPECT_THROW(ou_exact_ratio(0.5, 1.0, 0.0, 0.0, 0.0), Error);
  EXPECT_THROW(ou_exact_ratio(0.5, 1.0, 0.0, 0.0, -1.0), Error);
}

TEST(OuExactRatio, BelowBoundOnLattice) {
  const double x_max = 2.0, T = 1.0;
  for (double beta : {0.05, 0.5, 5.0}) {
    const double c = ou_bound(beta, x_max, 0.0, T);
    for (int k = 0; k < 50; ++k) {
      const double t = T * (k + 1) / 50.0;
      for (int j = 0; j < 200; ++j) {
        const double x = -x_max + 2.0 * x_max * j / 199.0;
        ASSERT_LE(ou_exact_ratio(beta, 1.0, 0.0, x, t), c) << beta << ' ' << x << ' ' << t;
      }
    }
  }
}

// Ratio times the Brownian density is the O-U density.
TEST(OuExactRatio, ReconstructsTargetDensity) {
  for (double beta : {0.05, 0.5, 5.0}) {
    for (double t : {0.1, 1.0}) {
      const double sd = std::sqrt(t), x0 = 0.4;
      const int n = 40000;
      const double lo = x0 - 20.0 * sd, h = 40.0 * sd / n;
      double mass = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double x = lo + k * h;
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        const double p1 = std::exp(-0.5 * (x - x0) * (x - x0) / t) / std::sqrt(2.0 * std::numbers::pi * t);
        mass += w * p1 * ou_exact_ratio(beta, 1.0, x0, x, t);
      }
      EXPECT_NEAR(mass * h, 1.0, 1e-8) << beta << ' ' << t;
    }
  }
}

TEST(OuMoments, KnownValues) {
  const auto m = ou_moments(1.0, 1.0, 1.0, 2.0);
  EXPECT_NEAR(m.mean, std::exp(-2.0), 1e-15);
  EXPECT_NEAR(m.variance, (1.0 - std::exp(-4.0)) / 2.0, 1e-15);
  EXPECT_NEAR(ou_moments(0.0, 2.0, 0.5, 3.0).variance, 12.0, 1e-15);
}

TEST(Empirical, SortedWithMoments) {
  const auto d = EmpiricalDistribution::from({3.0, 1.0, 2.0, 4.0});
  EXPECT_TRUE(std::is_sorted(d.sorted.begin(), d.sorted.end()));
  EXPECT_DOUBLE_EQ(d.mean, 2.5);
  EXPECT_DOUBLE_EQ(d.variance, 5.0 / 3.0);
  EXPECT_THROW(EmpiricalDistribution::from({}), Error);
  EXPECT_THROW(EmpiricalDistribution::from({1.0, std::numeric_limits<double>::quiet_NaN()}), Error);
  std::ostringstream out;
  write_distribution_csv(d, out);
  EXPECT_EQ(out.str(), "value\n1\n2\n3\n4\n");
}

TEST(EulerMaruyama, BrownianVariance) {
  EulerOptions o;
  o.jobs = 4;
  const auto r = euler_maruyama(brownian_model(1.0), 0.0, 1.0, 0.01, 100000, 5, o);
  const double se = std::sqrt(2.0 / 100000.0);
  EXPECT_NEAR(r.distribution.variance, 1.0, 3.0 * se);
}

TEST(EulerMaruyama, OuMean) {
  EulerOptions o;
  o.jobs = 4;
  const auto r = euler_maruyama(ou_model(1.0, 1.0), 1.0, 2.0, 0.01, 100000, 6, o);
  EXPECT_NEAR(r.distribution.mean, std::exp(-2.0), 3.0 * r.distribution.standard_error());
}

TEST(EulerMaruyama, WrightFisherNeutralMartingale) {
  EulerOptions o;
  o.policy = BoundaryPolicy::Clip;
  o.jobs = 4;
  const auto r = euler_maruyama(wf1d_model(0.0), 0.5, 0.5, 1e-4, 10000, 7, o);
  EXPECT_NEAR(r.distribution.mean, 0.5, 3.0 * r.distribution.standard_error());
  for (double x : r.distribution.sorted) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

// Small noise leaves the discretization bias of the mean visible: halving dt
// roughly halves it.
TEST(EulerMaruyama, WeakOrderOneTrend) {
  std::vector<double> err;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const auto r = euler_maruyama(ou_model(1.0, 1e-3), 1.0, 1.0, dt, 10000, 8);
    err.push_back(std::abs(r.distribution.mean - std::exp(-1.0)));
  }
  EXPECT_NEAR(err[0] / err[1], 2.0, 0.2);
  EXPECT_NEAR(err[1] / err[2], 2.0, 0.2);
}

TEST(EulerMaruyama, DeterministicAcrossJobs) {
  EulerOptions one, many;
  many.jobs = 3;
  const auto a = euler_maruyama(ou_model(0.5, 1.0), 0.0, 1.0, 0.01, 500, 9, one);
  const auto b = euler_maruyama(ou_model(0.5, 1.0), 0.0, 1.0, 0.01, 500, 9, many);
  EXPECT_EQ(a.distribution.sorted, b.distribution.sorted);
}

TEST(EulerMaruyama, NanIsBlowup) {
  SdeModel bad = brownian_model(1.0);
  bad.drift = [](const Vec2& x, double) {
    return Vec2{x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0, 0.0};
  };
  try {
    euler_maruyama(bad, 0.0, 1.0, 0.01, 200, 1);
    FAIL() << "expected blowup";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SimulationBlowup);
    EXPECT_NE(std::string(e.what()).find("path"), std::string::npos);
  }
  EXPECT_THROW(euler_maruyama(brownian_model(1.0), 0.0, 1.0, 0.0, 10, 1), Error);
}

TEST(EulerMaruyama, AbsorbDropsPaths) {
  EulerOptions o;
  o.policy = BoundaryPolicy::Absorb;
  const auto r = euler_maruyama(wf1d_model(0.0), 0.05, 1.0, 1e-3, 2000, 3, o);
  EXPECT_GT(r.absorbed, 0u);
  EXPECT_EQ(r.distribution.count() + r.absorbed, r.n_paths);
}

TEST(Ks, IdenticalSetsGiveZero) {
  const auto d = EmpiricalDistribution::from(normals(1000, 1));
  EXPECT_EQ(ks_statistic(d, d), 0.0);
}

TEST(Ks, NormalDrawsAgainstPhi) {
  const auto d = EmpiricalDistribution::from(normals(100000, 2));
  EXPECT_LT(ks_statistic(d, [](double x) { return normal_cdf(x); }), 0.006);
}

TEST(Ks, ShiftedNormal) {
  const auto d = EmpiricalDistribution::from(normals(100000, 3));
  const double expect = normal_cdf(0.5) - normal_cdf(-0.5);
  EXPECT_NEAR(ks_statistic(d, [](double x) { return normal_cdf(x, 1.0, 1.0); }), expect, 0.02);
  EXPECT_NEAR(expect, 0.383, 1e-3);
}

TEST(Ks, TwoSampleSymmetric) {
  const auto a = EmpiricalDistribution::from(normals(3000, 4));
  const auto b = EmpiricalDistribution::from(normals(1700, 5, 0.2));
  EXPECT_EQ(ks_statistic(a, b), ks_statistic(b, a));
  EXPECT_GT(ks_statistic(a, b), 0.0);
}

TEST(Ks, DegenerateInput) {
  const auto tiny = EmpiricalDistribution::from({1.0, 2.0, 3.0});
  EXPECT_THROW(ks_statistic(tiny, [](double x) { return normal_cdf(x); }), Error);
  const auto d = EmpiricalDistribution::from(normals(50, 6));
  EXPECT_THROW(ks_statistic(d, tiny), Error);
  EXPECT_THROW(ks_statistic(d, [](double) { return std::numeric_limits<double>::quiet_NaN(); }),
               Error);
}

}  // namespace
}  // namespace fpr
