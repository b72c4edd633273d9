#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "fpr/errors.hpp"
#include "fpr/oracle.hpp"
#include "fpr/process_catalog.hpp"
#include "fpr/ratio_pde.hpp"
#include "fpr/sampler.hpp"

namespace fpr {
namespace {

std::vector<Vec2> brownian_path(std::span<const double> times, std::uint64_t seed,
                                double x0 = 0.0) {
  ProposalSpec p;
  p.x0 = {x0, 0.0};
  return sample_proposal_path(p, times, seed);
}

RatioEvaluator constant_ratio(double v) {
  return [v](double, const Vec2&) { return v; };
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

TEST(Decide, ClampsAndCompares) {
  EXPECT_EQ(decide(0.5, 0.25, 1.0), Decision::Accepted);
  EXPECT_EQ(decide(0.5, 0.5, 1.0), Decision::Accepted);
  EXPECT_EQ(decide(0.5, 0.51, 1.0), Decision::Rejected);
  EXPECT_EQ(decide(1.0, 0.6, 2.0), Decision::Rejected);
  EXPECT_EQ(decide(-0.3, 1e-12, 1.0), Decision::ClampedRejected);
  EXPECT_EQ(to_string(Decision::ClampedRejected), "clamped-rejected");
}

TEST(Bounds, AnalyticAndEmpirical) {
  const auto b = analytic_ou_bound(0.05, 2.0, 0.0, 1.0);
  EXPECT_EQ(b.kind, BoundSpec::Kind::Analytic);
  EXPECT_NEAR(b.value, std::exp(0.025 * (4.0 + 1.0)), 1e-15);
  EXPECT_DOUBLE_EQ(empirical_bound(0.4).value, 1.05);
  EXPECT_DOUBLE_EQ(empirical_bound(3.0).value, 3.15);
  EXPECT_THROW(user_bound(0.0), Error);
}

TEST(Proposal, BrownianMarginalIsStandardNormal) {
  std::vector<double> xs;
  const double t[] = {1.0};
  for (std::uint64_t s = 0; s < 100000; ++s) xs.push_back(brownian_path(t, s)[0][0]);
  const auto d = EmpiricalDistribution::from(xs);
  EXPECT_LT(ks_statistic(d, [](double x) { return normal_cdf(x); }), 0.006);
}

TEST(Proposal, LogisticIsSigmoidOfBrownian) {
  ProposalSpec p;
  p.kind = ProposalKind::LogisticBrownian;
  p.x0 = {0.5, 0.0};
  const double t[] = {0.25, 0.7};
  std::vector<double> z;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    const auto path = sample_proposal_path(p, t, s);
    for (const auto& v : path) ASSERT_TRUE(v[0] > 0.0 && v[0] < 1.0);
    z.push_back(logit(path[1][0]));
  }
  const auto d = EmpiricalDistribution::from(z);
  EXPECT_LT(ks_statistic(d, [](double x) { return normal_cdf(x, 0.0, std::sqrt(0.7)); }), 0.015);
}

TEST(Proposal, DeterministicAndUnknownId) {
  const double t[] = {0.1, 0.2, 0.5, 1.0};
  const auto a = brownian_path(t, 42), b = brownian_path(t, 42), c = brownian_path(t, 43);
  EXPECT_EQ(0, std::memcmp(a.data(), b.data(), a.size() * sizeof(Vec2)));
  EXPECT_NE(a[3][0], c[3][0]);
  EXPECT_THROW(proposal_from_id("levy"), Error);
  EXPECT_EQ(proposal_from_id("logistic-brownian"), ProposalKind::LogisticBrownian);
}

TEST(RejectionPass, TrivialFields) {
  const std::vector<double> t{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto ones = rejection_pass(t, brownian_path(t, 1), 1, constant_ratio(1.0), user_bound(1.0), 1);
  EXPECT_EQ(ones.accepted_count(), t.size());
  const auto zeros = rejection_pass(t, brownian_path(t, 1), 1, constant_ratio(0.0), user_bound(1.0), 1);
  EXPECT_EQ(zeros.accepted_count(), 0u);
  const auto neg = rejection_pass(t, brownian_path(t, 1), 1, constant_ratio(-1.0), user_bound(1.0), 1);
  for (auto d : neg.decisions) EXPECT_EQ(d, Decision::ClampedRejected);
}

TEST(RejectionPass, DecisionsFollowUniforms) {
  std::vector<double> t;
  for (int i = 1; i <= 50; ++i) t.push_back(i / 50.0);
  const auto eval = [](double tt, const Vec2& x) { return ou_exact_ratio(0.5, 1.0, 0.0, x[0], tt); };
  const auto bound = analytic_ou_bound(0.5, 2.0, 0.0, 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = rejection_pass(t, brownian_path(t, s), 1, eval, bound, s);
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(p.decisions[i], decide(p.ratio[i], p.uniforms[i], p.bound_c));
      EXPECT_EQ(p.ratio[i], eval(t[i], p.proposal[i]));
    }
  }
}

TEST(RejectionPass, OutsideFieldIsDomainError) {
  RatioField f;
  f.grid = Grid1D{-1.0, 1.0, 10, 0.0, 1.0, 10};
  f.values.assign(11 * 11, 1.0);
  const auto eval = field_evaluator(std::make_shared<const RatioField>(f));
  const std::vector<double> t{0.5};
  const std::vector<Vec2> far{{5.0, 0.0}};
  EXPECT_THROW(rejection_pass(t, far, 1, eval, user_bound(1.0), 1), Error);
}

// Point acceptance probability E[min(V / c, 1)] under the Brownian proposal.
double expected_acceptance(double beta, double c, double t) {
  const int n = 4000;
  const double sd = std::sqrt(t), lo = -10.0 * sd, h = 20.0 * sd / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + k * h;
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    const double dens = std::exp(-0.5 * x * x / t) / std::sqrt(2.0 * std::numbers::pi * t);
    s += w * dens * std::min(1.0, ou_exact_ratio(beta, 1.0, 0.0, x, t) / c);
  }
  return s * h;
}

TEST(RejectionPass, AcceptanceRateMatchesExpectation) {
  const double beta = 0.5;
  const std::vector<double> t{0.25, 0.5, 0.75, 1.0};
  const auto bound = analytic_ou_bound(beta, 2.0, 0.0, 1.0);
  const auto eval = [beta](double tt, const Vec2& x) { return ou_exact_ratio(beta, 1.0, 0.0, x[0], tt); };
  std::vector<double> per_path;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto p = rejection_pass(t, brownian_path(t, s), 1, eval, bound, s);
    per_path.push_back(double(p.accepted_count()) / t.size());
  }
  double expect = 0.0;
  for (double tt : t) expect += expected_acceptance(beta, bound.value, tt) / t.size();
  const double se = sd_of(per_path) / std::sqrt(double(per_path.size()));
  EXPECT_NEAR(mean_of(per_path), expect, 3.0 * se);
  EXPECT_GT(expect, 0.0);
  EXPECT_LT(expect, 1.0);
}

TEST(RejectionPass, LargerBoundKeepsDistribution) {
  const double beta = 0.5;
  const std::vector<double> t{1.0};
  const auto b1 = analytic_ou_bound(beta, 2.0, 0.0, 1.0);
  const auto b2 = user_bound(2.0 * b1.value);
  const auto eval = [beta](double tt, const Vec2& x) { return ou_exact_ratio(beta, 1.0, 0.0, x[0], tt); };
  std::vector<double> a1, a2;
  for (std::uint64_t s = 0; s < 40000; ++s) {
    const auto path = brownian_path(t, s);
    if (rejection_pass(t, path, 1, eval, b1, s).accepted_count()) a1.push_back(path[0][0]);
    if (rejection_pass(t, path, 1, eval, b2, s).accepted_count()) a2.push_back(path[0][0]);
  }
  EXPECT_LT(a2.size(), a1.size());
  const double n = a1.size(), m = a2.size();
  const double crit = 1.95 * std::sqrt((n + m) / (n * m));  // alpha = 0.001
  EXPECT_LT(ks_statistic(EmpiricalDistribution::from(a1), EmpiricalDistribution::from(a2)), crit);
  // Accepted samples follow the O-U marginal.
  const auto m1 = ou_moments(beta, 1.0, 0.0, 1.0);
  EXPECT_LT(ks_statistic(EmpiricalDistribution::from(a1),
                         [&](double x) { return normal_cdf(x, m1.mean, std::sqrt(m1.variance)); }),
            1.95 / std::sqrt(n));
}

TEST(BridgeInfill, NoRejectionsKeepsProposal) {
  const std::vector<double> t{0.2, 0.4, 0.6};
  auto p = rejection_pass(t, brownian_path(t, 9), 1, constant_ratio(1.0), user_bound(1.0), 9);
  ProposalSpec spec;
  bridge_infill(p, spec);
  EXPECT_EQ(p.valid_length, 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p.output[i][0], p.proposal[i][0]);
}

TEST(BridgeInfill, InteriorMomentsAndAcceptedUntouched) {
  const std::vector<double> t{0.2, 0.5, 1.0};
  const std::vector<Vec2> path{{0.3, 0.0}, {9.0, 0.0}, {-0.4, 0.0}};
  const auto eval = [](double tt, const Vec2&) { return tt == 0.5 ? 0.0 : 1.0; };
  ProposalSpec spec;
  std::vector<double> mid;
  for (std::uint64_t s = 0; s < 100000; ++s) {
    auto p = rejection_pass(t, path, 1, eval, user_bound(1.0), s);
    bridge_infill(p, spec);
    ASSERT_EQ(std::memcmp(&p.output[0][0], &path[0][0], sizeof(double)), 0);
    ASSERT_EQ(std::memcmp(&p.output[2][0], &path[2][0], sizeof(double)), 0);
    mid.push_back(p.output[1][0]);
  }
  const double expect = 0.3 + (0.5 - 0.2) / (1.0 - 0.2) * (-0.4 - 0.3);
  const double var = (0.5 - 0.2) * (1.0 - 0.5) / (1.0 - 0.2);
  EXPECT_NEAR(mean_of(mid), expect, 3.0 * std::sqrt(var / mid.size()));
  EXPECT_NEAR(sd_of(mid), std::sqrt(var), 0.01);
}

TEST(BridgeInfill, RejectedHeadAnchorsAtStartAndTailTruncates) {
  const std::vector<double> t{0.5, 1.0, 1.5};
  const std::vector<Vec2> path{{5.0, 0.0}, {1.0, 0.0}, {7.0, 0.0}};
  const auto eval = [](double tt, const Vec2&) { return tt == 1.0 ? 1.0 : 0.0; };
  ProposalSpec spec;
  spec.x0 = {-1.0, 0.0};
  std::vector<double> head;
  for (std::uint64_t s = 0; s < 20000; ++s) {
    auto p = rejection_pass(t, path, 1, eval, user_bound(1.0), s);
    bridge_infill(p, spec);
    ASSERT_EQ(p.valid_length, 2u);
    ASSERT_TRUE(std::isnan(p.output[2][0]));
    head.push_back(p.output[0][0]);
  }
  EXPECT_NEAR(mean_of(head), 0.0, 3.0 * std::sqrt(0.25 / head.size()));

  auto none = rejection_pass(t, path, 1, constant_ratio(0.0), user_bound(1.0), 1);
  try {
    bridge_infill(none, spec);
    FAIL() << "expected whole-path rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WholePathRejected);
  }
}

TEST(BridgeInfill, Reproducible) {
  const std::vector<double> t{0.2, 0.5, 1.0};
  const std::vector<Vec2> path{{0.3, 0.0}, {9.0, 0.0}, {-0.4, 0.0}};
  const auto eval = [](double tt, const Vec2&) { return tt == 0.5 ? 0.0 : 1.0; };
  ProposalSpec spec;
  auto a = rejection_pass(t, path, 1, eval, user_bound(1.0), 77);
  auto b = a;
  bridge_infill(a, spec);
  bridge_infill(b, spec);
  EXPECT_EQ(a.output[1][0], b.output[1][0]);
}

Generic1dSamplerConfig identity_brownian(double c) {
  Generic1dSamplerConfig g;
  const auto m = brownian_model(1.0);
  g.coeffs = build_ratio_pde_1d(m, m, ou_transition_density(0.0, 1.0, 0.0));
  g.times = {0.25, 0.5, 0.75, 1.0};
  g.M = 60;
  g.N = 40;
  g.bound_kind = BoundSpec::Kind::User;
  g.bound_value = c;
  return g;
}

TEST(PathSampler, RetriesThenReportsFailure) {
  auto cfg = identity_brownian(1e12);
  cfg.retries = 3;
  const Generic1dSampler sampler(cfg);
  try {
    sampler.sample(5, 0);
    FAIL() << "expected sampling failure";
  } catch (const PathSamplingFailure& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SamplingFailure);
    EXPECT_EQ(e.last_attempt().attempts, 3);
    EXPECT_EQ(e.last_attempt().accepted_count(), 0u);
  }
  const auto report = sample_paths_report(sampler, 5, 4, 2);
  ASSERT_EQ(report.size(), 4u);
  for (const auto& p : report) EXPECT_TRUE(p.failed);
  EXPECT_EQ(summarize(report).failed, 4u);
  EXPECT_THROW(sample_paths(sampler, 5, 2), Error);
}

TEST(PathSampler, IdentityAcceptsEverything) {
  const Generic1dSampler sampler(identity_brownian(1.0));
  const auto paths = sample_paths(sampler, 3, 50);
  EXPECT_DOUBLE_EQ(summarize(paths).acceptance_rate(), 1.0);
}

TEST(PathSampler, DeterministicAcrossJobs) {
  OuSamplerConfig cfg;
  cfg.beta = 0.5;
  for (int i = 1; i <= 20; ++i) cfg.times.push_back(i / 20.0);
  cfg.M = 80;
  cfg.N = 60;
  const OuSampler sampler(cfg);
  const auto a = sample_paths(sampler, 11, 12, 1), b = sample_paths(sampler, 11, 12, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].seed, b[i].seed);
    for (std::size_t k = 0; k < a[i].valid_length; ++k) {
      ASSERT_EQ(std::memcmp(&a[i].output[k][0], &b[i].output[k][0], sizeof(double)), 0);
    }
  }
  EXPECT_NE(path_seed(11, 0, 0), path_seed(11, 1, 0));
  EXPECT_NE(path_seed(11, 0, 0), path_seed(11, 0, 1));
}

TEST(PathSampler, LargeBetaRejectsAlmostEverything) {
  OuSamplerConfig cfg;
  cfg.beta = 25.0;
  for (int i = 1; i <= 50; ++i) cfg.times.push_back(i / 50.0);
  cfg.retries = 1;
  const OuSampler sampler(cfg);
  const auto paths = sample_paths_report(sampler, 1, 100);
  const auto s = summarize(paths);
  EXPECT_GE(1.0 - s.acceptance_rate(), 0.99);
}

TEST(WfSampler, OutputsInUnitInterval) {
  Wf1dSamplerConfig cfg;
  for (int i = 1; i <= 50; ++i) cfg.times.push_back(i / 50.0);
  cfg.M = 200;
  cfg.N = 200;
  const Wf1dSampler sampler(cfg);
  const auto paths = sample_paths_report(sampler, 4, 20);
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.valid_length; ++k) {
      EXPECT_GT(p.output[k][0], 0.0);
      EXPECT_LT(p.output[k][0], 1.0);
    }
  }
  EXPECT_GT(summarize(paths).accepted, 0u);
}

TEST(WfSampler, ForcedIdentityAcceptsEverything) {
  Wf1dSamplerConfig cfg;
  for (int i = 1; i <= 50; ++i) cfg.times.push_back(i / 50.0);
  cfg.M = 100;
  cfg.N = 100;
  cfg.force_identity = true;
  const Wf1dSampler sampler(cfg);
  EXPECT_DOUBLE_EQ(summarize(sample_paths(sampler, 8, 30)).acceptance_rate(), 1.0);
}

TEST(WfSampler, TwoDimensionalOutputsInUnitSquare) {
  Wf2dSamplerConfig cfg;
  cfg.times = {0.25, 0.5, 0.75, 1.0};
  cfg.domain = DomainMode::Fixed;
  cfg.M = 20;
  cfg.N = 20;
  const Wf2dSampler sampler(cfg);
  ASSERT_TRUE(sampler.fixed_field());
  const auto paths = sample_paths_report(sampler, 2, 10);
  for (const auto& p : paths) {
    EXPECT_EQ(p.dim, 2);
    for (std::size_t k = 0; k < p.valid_length; ++k) {
      for (int d = 0; d < 2; ++d) {
        EXPECT_GT(p.output[k][d], 0.0);
        EXPECT_LT(p.output[k][d], 1.0);
      }
    }
  }
}

TEST(PathCsv, Header) {
  const std::vector<double> t{0.5, 1.0};
  auto p = rejection_pass(t, brownian_path(t, 2), 1, constant_ratio(1.0), user_bound(1.0), 2);
  bridge_infill(p, ProposalSpec{});
  std::ostringstream out;
  write_path_csv(p, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,proposal,ratio,uniform,decision,output");
}

TEST(WfCoordinates, RoundTrip) {
  for (double x : {0.01, 0.3, 0.5, 0.77, 0.99}) EXPECT_NEAR(wf_from_logit(wf_to_logit(x)), x, 1e-14);
}

}  // namespace
}  // namespace fpr
