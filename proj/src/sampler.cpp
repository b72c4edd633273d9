#include "fpr/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "fpr/errors.hpp"
#include "fpr/io.hpp"
#include "fpr/oracle.hpp"
#include "fpr/ratio_pde.hpp"
#include "fpr/rng.hpp"

namespace fpr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double to_driving(ProposalKind k, double x) {
  return k == ProposalKind::Brownian ? x : logit(x);
}
double from_driving(ProposalKind k, double z) {
  return k == ProposalKind::Brownian ? z : sigmoid(z);
}

void check_times(std::span<const double> times, double t0) {
  if (times.empty()) fail(ErrorKind::InvalidInput, "path needs at least one time");
  double prev = t0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev) {
      fail(ErrorKind::InvalidInput, "path times must be finite, >= t0 and non-decreasing");
    }
    prev = t;
  }
}

// Correlated pair of standard normals.
Vec2 correlated(CounterRng& rng, double rho) {
  const double a = rng.normal(), b = rng.normal();
  return {a, rho * a + std::sqrt(1.0 - rho * rho) * b};
}

}  // namespace

ProposalKind proposal_from_id(std::string_view id) {
  if (id == "brownian") return ProposalKind::Brownian;
  if (id == "logistic-brownian") return ProposalKind::LogisticBrownian;
  fail(ErrorKind::UnknownProcess, "unknown proposal process '" + std::string(id) + "'");
}

std::string_view proposal_id(ProposalKind kind) {
  return kind == ProposalKind::Brownian ? "brownian" : "logistic-brownian";
}

std::vector<Vec2> sample_proposal_path(const ProposalSpec& p, std::span<const double> times,
                                       std::uint64_t seed) {
  check_times(times, p.t0);
  if (!(p.sigma > 0.0)) fail(ErrorKind::InvalidParameter, "proposal sigma must be positive");
  if (p.dim != 1 && p.dim != 2) fail(ErrorKind::InvalidParameter, "dim must be 1 or 2");
  if (!(std::abs(p.rho) < 1.0)) fail(ErrorKind::InvalidParameter, "|rho| must be < 1");
  CounterRng rng(seed, StreamRole::Path, 0);
  Vec2 z{to_driving(p.kind, p.x0[0]), p.dim == 2 ? to_driving(p.kind, p.x0[1]) : 0.0};
  double prev = p.t0;
  std::vector<Vec2> out;
  out.reserve(times.size());
  for (double t : times) {
    const double sd = p.sigma * std::sqrt(t - prev);
    if (p.dim == 1) {
      z[0] += sd * rng.normal();
    } else {
      const Vec2 n = correlated(rng, p.rho);
      z[0] += sd * n[0];
      z[1] += sd * n[1];
    }
    prev = t;
    out.push_back({from_driving(p.kind, z[0]), p.dim == 2 ? from_driving(p.kind, z[1]) : 0.0});
  }
  return out;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Accepted: return "accepted";
    case Decision::Rejected: return "rejected";
    case Decision::ClampedRejected: return "clamped-rejected";
  }
  return "unknown";
}

Decision decide(double ratio, double u, double c) {
  if (ratio < 0.0) return Decision::ClampedRejected;
  return u <= ratio / c ? Decision::Accepted : Decision::Rejected;
}

std::string_view to_string(BoundSpec::Kind k) {
  switch (k) {
    case BoundSpec::Kind::Analytic: return "analytic";
    case BoundSpec::Kind::Empirical: return "empirical";
    case BoundSpec::Kind::User: return "user";
  }
  return "unknown";
}

BoundSpec analytic_ou_bound(double beta, double x_max, double x0, double T) {
  return {BoundSpec::Kind::Analytic, ou_bound(beta, x_max, x0, T),
          "exp((beta/2)(x_max^2 - x0^2 + T)) with x_max=" + fmt(x_max)};
}

BoundSpec empirical_bound(double max_ratio, double safety) {
  if (!(safety >= 1.0)) fail(ErrorKind::InvalidParameter, "bound safety factor must be >= 1");
  return {BoundSpec::Kind::Empirical, std::max(1.0, max_ratio) * safety,
          "max(1, max V over the solved field) * " + fmt(safety)};
}

BoundSpec user_bound(double c) {
  if (!(c > 0.0)) fail(ErrorKind::InvalidParameter, "bound must be positive");
  return {BoundSpec::Kind::User, c, "user supplied"};
}

std::size_t PathSample::accepted_count() const {
  return static_cast<std::size_t>(
      std::count(decisions.begin(), decisions.end(), Decision::Accepted));
}

RatioEvaluator field_evaluator(std::shared_ptr<const RatioField> field) {
  return [field](double t, const Vec2& x) { return eval_field(*field, x[0], t); };
}

RatioEvaluator field_evaluator(std::shared_ptr<const RatioField2D> field) {
  return [field](double t, const Vec2& x) { return eval_field_2d(*field, x[0], x[1], t); };
}

PathSample rejection_pass(std::span<const double> times, std::vector<Vec2> proposal, int dim,
                          const RatioEvaluator& ratio, const BoundSpec& bound,
                          std::uint64_t seed) {
  if (proposal.size() != times.size()) {
    fail(ErrorKind::InvalidInput, "proposal path and times differ in length");
  }
  if (!(bound.value > 0.0)) fail(ErrorKind::InvalidParameter, "bound must be positive");
  PathSample s;
  s.dim = dim;
  s.times.assign(times.begin(), times.end());
  s.seed = seed;
  s.bound_c = bound.value;
  CounterRng rng(seed, StreamRole::Uniform, 0);
  const std::size_t n = times.size();
  s.ratio.resize(n);
  s.uniforms.resize(n);
  s.decisions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.ratio[i] = ratio(times[i], proposal[i]);
    s.uniforms[i] = rng.uniform();
    s.decisions[i] = decide(s.ratio[i], s.uniforms[i], bound.value);
  }
  s.output = proposal;
  s.proposal = std::move(proposal);
  s.valid_length = n;
  return s;
}

void bridge_infill(PathSample& path, const ProposalSpec& p) {
  const std::size_t n = path.times.size();
  std::size_t last = n;
  for (std::size_t i = n; i-- > 0;) {
    if (path.decisions[i] == Decision::Accepted) {
      last = i;
      break;
    }
  }
  if (last == n) fail(ErrorKind::WholePathRejected, "every point of the path was rejected");

  CounterRng rng(path.seed, StreamRole::Bridge, 0);
  const int dim = path.dim;
  double t_prev = p.t0;
  Vec2 z_prev{to_driving(p.kind, p.x0[0]), dim == 2 ? to_driving(p.kind, p.x0[1]) : 0.0};
  std::size_t i = 0;
  while (i <= last) {
    if (path.decisions[i] == Decision::Accepted) {
      path.output[i] = path.proposal[i];
      t_prev = path.times[i];
      for (int d = 0; d < dim; ++d) z_prev[d] = to_driving(p.kind, path.proposal[i][d]);
      ++i;
      continue;
    }
    std::size_t b = i;
    while (path.decisions[b] != Decision::Accepted) ++b;
    const double tb = path.times[b];
    Vec2 zb{};
    for (int d = 0; d < dim; ++d) zb[d] = to_driving(p.kind, path.proposal[b][d]);
    // Sequential exact bridge draws, each conditioned on the previous fill.
    for (; i < b; ++i) {
      const double t = path.times[i];
      const double span = tb - t_prev;
      const double w = span > 0.0 ? (t - t_prev) / span : 0.0;
      const double var = span > 0.0 ? p.sigma * p.sigma * (t - t_prev) * (tb - t) / span : 0.0;
      const double sd = std::sqrt(std::max(0.0, var));
      Vec2 noise{};
      if (dim == 1) {
        noise[0] = rng.normal();
      } else {
        noise = correlated(rng, p.rho);
      }
      Vec2 out{};
      for (int d = 0; d < dim; ++d) {
        z_prev[d] = z_prev[d] + w * (zb[d] - z_prev[d]) + sd * noise[d];
        out[d] = from_driving(p.kind, z_prev[d]);
      }
      path.output[i] = out;
      t_prev = t;
    }
  }
  for (std::size_t k = last + 1; k < n; ++k) path.output[k] = {kNaN, kNaN};
  path.valid_length = last + 1;
}

std::uint64_t path_seed(std::uint64_t root, std::uint64_t index, std::uint64_t attempt) {
  return CounterRng(root, StreamRole::Path, index, attempt + 1).next_u64();
}

std::string_view to_string(DomainMode m) { return m == DomainMode::Path ? "path" : "fixed"; }

DomainMode domain_mode_from_id(std::string_view id) {
  if (id == "path") return DomainMode::Path;
  if (id == "fixed") return DomainMode::Fixed;
  fail(ErrorKind::InvalidParameter, "domain must be 'path' or 'fixed', got '" +
                                        std::string(id) + "'");
}

SamplerStats summarize(std::span<const PathSample> paths) {
  SamplerStats s;
  for (const auto& p : paths) {
    ++s.paths;
    s.points += p.decisions.size();
    s.accepted += p.accepted_count();
    s.clamped += static_cast<std::size_t>(
        std::count(p.decisions.begin(), p.decisions.end(), Decision::ClampedRejected));
    s.attempts += static_cast<std::size_t>(p.attempts);
    s.failed += p.failed;
  }
  return s;
}

std::vector<PathSample> sample_paths(const PathSampler& sampler, std::uint64_t root,
                                     std::size_t n, int jobs, std::size_t first) {
  std::vector<PathSample> out(n);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = sampler.sample(root, first + i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<PathSample> sample_paths_report(const PathSampler& sampler, std::uint64_t root,
                                            std::size_t n, int jobs, std::size_t first) {
  struct Tolerant final : PathSampler {
    const PathSampler& inner;
    explicit Tolerant(const PathSampler& s) : inner(s) {}
    PathSample sample(std::uint64_t r, std::size_t i) const override {
      try {
        return inner.sample(r, i);
      } catch (const PathSamplingFailure& e) {
        PathSample s = e.last_attempt();
        s.failed = true;
        return s;
      }
    }
  } tolerant(sampler);
  return sample_paths(tolerant, root, n, jobs, first);
}

namespace {

using Prepared = std::pair<RatioEvaluator, BoundSpec>;

/// Proposal draw, ratio, accept/reject and bridge, retried on whole-path rejection.
PathSample run_attempts(const ProposalSpec& prop, std::span<const double> times, int retries,
                        std::uint64_t root, std::size_t index,
                        const std::function<Prepared(const std::vector<Vec2>&)>& prepare) {
  if (retries < 1) fail(ErrorKind::InvalidParameter, "retries must be >= 1");
  PathSample last;
  for (int a = 0; a < retries; ++a) {
    const std::uint64_t seed = path_seed(root, index, static_cast<std::uint64_t>(a));
    auto path = sample_proposal_path(prop, times, seed);
    auto [ratio, bound] = prepare(path);
    PathSample s = rejection_pass(times, std::move(path), prop.dim, ratio, bound, seed);
    s.attempts = a + 1;
    try {
      bridge_infill(s, prop);
      return s;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::WholePathRejected) throw;
    }
    for (auto& v : s.output) v = {std::nan(""), std::nan("")};
    s.valid_length = 0;
    last = std::move(s);
  }
  const double c = last.bound_c;
  throw PathSamplingFailure(
      "path " + std::to_string(index) + ": all " + std::to_string(retries) +
          " proposal paths were rejected at every point (bound c=" + fmt(c) + ")",
      std::move(last));
}

double path_end(std::span<const double> times) {
  if (times.empty()) fail(ErrorKind::InvalidInput, "sampler needs path times");
  if (!(times.back() > 0.0)) fail(ErrorKind::InvalidInput, "last path time must be > 0");
  return times.back();
}

double field_max(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

// -- O-U ----------------------------------------------------------------------

OuSampler::OuSampler(OuSamplerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.beta < 0.0) fail(ErrorKind::InvalidParameter, "beta must be >= 0");
  if (!(cfg_.sigma > 0.0)) fail(ErrorKind::InvalidParameter, "sigma must be positive");
  check_times(cfg_.times, 0.0);
  const double T = path_end(cfg_.times);
  if (cfg_.mode == OuSamplerConfig::RatioMode::Pde && cfg_.domain == DomainMode::Fixed) {
    const double half = 6.0 * cfg_.sigma * std::sqrt(T);
    Grid1D g = cfg_.pad ? padded_grid(cfg_.x0 - half, cfg_.x0 + half, cfg_.sigma * cfg_.sigma,
                                      cfg_.M, 0.0, T, cfg_.N)
                        : Grid1D{cfg_.x0 - half, cfg_.x0 + half, cfg_.M, 0.0, T, cfg_.N};
    fixed_ = std::make_shared<RatioField>(
        solve_ratio_1d(ou_ratio_coefficients(cfg_.beta, cfg_.sigma, cfg_.x0), g));
  }
  if (cfg_.bound_kind == BoundSpec::Kind::Empirical &&
      cfg_.mode == OuSamplerConfig::RatioMode::Exact) {
    fail(ErrorKind::InvalidParameter, "empirical bound needs the PDE ratio mode");
  }
}

Grid1D OuSampler::grid_for(std::span<const Vec2> path) const {
  double lo = cfg_.x0, hi = cfg_.x0;
  for (const auto& p : path) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  const double T = path_end(cfg_.times);
  if (cfg_.pad) return padded_grid(lo, hi, cfg_.sigma * cfg_.sigma, cfg_.M, 0.0, T, cfg_.N);
  if (hi - lo < 1e-12) {
    lo -= 1e-6;
    hi += 1e-6;
  }
  Grid1D g{lo, hi, cfg_.M, 0.0, T, cfg_.N};
  g.validate();
  return g;
}

RatioField OuSampler::solve_for(std::span<const Vec2> path) const {
  return solve_ratio_1d(ou_ratio_coefficients(cfg_.beta, cfg_.sigma, cfg_.x0), grid_for(path));
}

PathSample OuSampler::sample(std::uint64_t root, std::size_t index) const {
  ProposalSpec prop{ProposalKind::Brownian, 1, cfg_.sigma, 0.0, 0.0, {cfg_.x0, 0.0}};
  const double T = path_end(cfg_.times);
  auto bound_for = [&](const std::vector<double>* field) {
    switch (cfg_.bound_kind) {
      case BoundSpec::Kind::Analytic: return analytic_ou_bound(cfg_.beta, cfg_.bound_x_max, cfg_.x0, T);
      case BoundSpec::Kind::User: return user_bound(cfg_.bound_value);
      case BoundSpec::Kind::Empirical: return empirical_bound(field_max(*field), cfg_.bound_safety);
    }
    return user_bound(cfg_.bound_value);
  };
  return run_attempts(prop, cfg_.times, cfg_.retries, root, index,
                      [&](const std::vector<Vec2>& path) -> Prepared {
    if (cfg_.mode == OuSamplerConfig::RatioMode::Exact) {
      RatioEvaluator r = [this](double t, const Vec2& x) {
        return t <= 0.0 ? 1.0 : ou_exact_ratio(cfg_.beta, cfg_.sigma, cfg_.x0, x[0], t);
      };
      return {r, bound_for(nullptr)};
    }
    std::shared_ptr<const RatioField> field =
        fixed_ ? fixed_ : std::make_shared<RatioField>(solve_for(path));
    return {field_evaluator(field), bound_for(&field->values)};
  });
}

// -- WF 1D -------------------------------------------------------------------

double wf_from_logit(double b) { return 0.5 * (1.0 + std::sin(b)); }
double wf_to_logit(double x) { return std::asin(2.0 * x - 1.0); }

namespace {
double window_cap(double margin) {
  if (!(margin > 0.0 && margin < std::numbers::pi / 2)) {
    fail(ErrorKind::InvalidParameter, "logit window margin must lie in (0, pi/2)");
  }
  return std::numbers::pi / 2 - margin;
}
}  // namespace

Wf1dSampler::Wf1dSampler(Wf1dSamplerConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.x0 > 0.0 && cfg_.x0 < 1.0)) fail(ErrorKind::InvalidParameter, "x0 must lie in (0, 1)");
  check_times(cfg_.times, 0.0);
  path_end(cfg_.times);
  window_cap(cfg_.margin);
  const double y0 = sigmoid(wf_to_logit(cfg_.x0));
  if (cfg_.force_identity) {
    const SdeModel lb = logistic_brownian_model();
    coeffs_ = build_ratio_pde_1d(lb, lb, logistic_brownian_density(0.0, y0));
  } else {
    coeffs_ = wf1d_ratio_coefficients(cfg_.gamma, y0, 0.0, cfg_.convention);
  }
  if (cfg_.domain == DomainMode::Fixed) {
    const double cap = window_cap(cfg_.margin);
    fixed_ = std::make_shared<RatioField>(
        solve_on(Grid1D{sigmoid(-cap), sigmoid(cap), cfg_.M, 0.0, path_end(cfg_.times), cfg_.N}));
  }
}

ProposalSpec Wf1dSampler::proposal() const {
  return {ProposalKind::LogisticBrownian, 1, 1.0, 0.0, 0.0,
          {sigmoid(wf_to_logit(cfg_.x0)), 0.0}};
}

RatioField Wf1dSampler::solve_on(const Grid1D& grid) const { return solve_ratio_1d(coeffs_, grid); }

Grid1D Wf1dSampler::grid_for(std::span<const Vec2> path) const {
  const double cap = window_cap(cfg_.margin);
  const double wlo = sigmoid(-cap), whi = sigmoid(cap);
  double lo = proposal().x0[0], hi = lo;
  for (const auto& p : path) {
    if (p[0] > wlo && p[0] < whi) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
  }
  // Squared diffusion of the logistic proposal is at most 1/16.
  Grid1D g = padded_grid(lo, hi, 1.0 / 16.0, cfg_.M, 0.0, path_end(cfg_.times), cfg_.N);
  g.x_min = std::max(g.x_min, wlo);
  g.x_max = std::min(g.x_max, whi);
  g.validate();
  return g;
}

PathSample Wf1dSampler::sample(std::uint64_t root, std::size_t index) const {
  const ProposalSpec prop = proposal();
  PathSample s = run_attempts(prop, cfg_.times, cfg_.retries, root, index,
                              [&](const std::vector<Vec2>& path) -> Prepared {
    std::shared_ptr<const RatioField> field =
        fixed_ ? fixed_ : std::make_shared<RatioField>(solve_on(grid_for(path)));
    // Outside the solved window the WF target density is zero; an identity
    // target has no window and its ratio is 1 there.
    const double outside = cfg_.force_identity ? 1.0 : 0.0;
    RatioEvaluator r = [field, outside](double t, const Vec2& y) {
      const Grid1D& g = field->grid;
      if (!(y[0] >= g.x_min && y[0] <= g.x_max)) return outside;
      return eval_field(*field, y[0], t);
    };
    // With the target forced to the proposal V is 1 up to round-off, so c = 1 is exact.
    if (cfg_.force_identity) return {r, BoundSpec{BoundSpec::Kind::User, 1.0, "identity target"}};
    return {r, empirical_bound(field_max(field->values), cfg_.bound_safety)};
  });
  for (std::size_t i = 0; i < s.valid_length; ++i) {
    s.output[i][0] = cfg_.force_identity ? s.output[i][0] : wf_from_logit(logit(s.output[i][0]));
  }
  return s;
}

// -- WF 2D -------------------------------------------------------------------

Wf2dSampler::Wf2dSampler(Wf2dSamplerConfig cfg) : cfg_(std::move(cfg)) {
  for (double v : cfg_.x0) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorKind::InvalidParameter, "x0 must lie in (0, 1)^2");
  }
  check_times(cfg_.times, 0.0);
  path_end(cfg_.times);
  window_cap(cfg_.margin);
  coeffs_ = wf2d_ratio_coefficients(cfg_.h_sel, {wf_to_logit(cfg_.x0[0]), wf_to_logit(cfg_.x0[1])},
                                    cfg_.rho, 0.0, cfg_.convention);
  if (cfg_.domain == DomainMode::Fixed) {
    const double cap = window_cap(cfg_.margin);
    Grid2D g{-cap, cap, -cap, cap, cfg_.M, cfg_.M, 0.0, path_end(cfg_.times), cfg_.N};
    g.N = std::max(g.N, static_cast<int>(std::ceil(g.T / std::min(g.dx(), g.dy()) - 1e-9)));
    fixed_ = std::make_shared<RatioField2D>(solve_ratio_2d(coeffs_, g, cfg_.order));
  }
}

Grid2D Wf2dSampler::grid_for(std::span<const Vec2> path) const {
  const double cap = window_cap(cfg_.margin);
  const Vec2 b0 = coeffs_.initial_logits;
  Vec2 lo = b0, hi = b0;
  for (const auto& p : path) {
    for (int d = 0; d < 2; ++d) {
      const double b = logit(p[d]);
      if (std::abs(b) <= cap) {
        lo[d] = std::min(lo[d], b);
        hi[d] = std::max(hi[d], b);
      }
    }
  }
  const double T = path_end(cfg_.times);
  Grid2D g;
  g.Mx = g.My = cfg_.M;
  g.t0 = 0.0;
  g.T = T;
  double* lims[2][2] = {{&g.x_min, &g.x_max}, {&g.y_min, &g.y_max}};
  for (int d = 0; d < 2; ++d) {
    const double pad = std::max(3.0 * std::sqrt(T), 0.1 * (hi[d] - lo[d]));
    *lims[d][0] = std::max(-cap, lo[d] - pad);
    *lims[d][1] = std::min(cap, hi[d] + pad);
  }
  g.N = std::max(cfg_.N, static_cast<int>(std::ceil(T / std::min(g.dx(), g.dy()) - 1e-9)));
  g.validate(true);
  return g;
}

PathSample Wf2dSampler::sample(std::uint64_t root, std::size_t index) const {
  const ProposalSpec prop{ProposalKind::LogisticBrownian, 2, 1.0, cfg_.rho, 0.0,
                          {sigmoid(coeffs_.initial_logits[0]), sigmoid(coeffs_.initial_logits[1])}};
  PathSample s = run_attempts(prop, cfg_.times, cfg_.retries, root, index,
                              [&](const std::vector<Vec2>& path) -> Prepared {
    std::shared_ptr<const RatioField2D> field =
        fixed_ ? fixed_ : std::make_shared<RatioField2D>(solve_ratio_2d(coeffs_, grid_for(path), cfg_.order));
    RatioEvaluator r = [field](double t, const Vec2& y) {
      const Grid2D& g = field->grid;
      const double bx = logit(y[0]), by = logit(y[1]);
      if (!(bx >= g.x_min && bx <= g.x_max && by >= g.y_min && by <= g.y_max)) return 0.0;
      return eval_field_2d(*field, bx, by, t);
    };
    return {r, empirical_bound(field_max(field->values), cfg_.bound_safety)};
  });
  for (std::size_t i = 0; i < s.valid_length; ++i) {
    for (int d = 0; d < 2; ++d) s.output[i][d] = wf_from_logit(logit(s.output[i][d]));
  }
  return s;
}

// -- generic 1D ----------------------------------------------------------------

Generic1dSampler::Generic1dSampler(Generic1dSamplerConfig cfg) : cfg_(std::move(cfg)) {
  check_times(cfg_.times, cfg_.proposal.t0);
  if (cfg_.proposal.dim != 1) fail(ErrorKind::InvalidParameter, "generic sampler is 1D only");
  if (cfg_.domain == DomainMode::Fixed) {
    fixed_ = std::make_shared<RatioField>(solve_on(Grid1D{cfg_.x_min, cfg_.x_max, cfg_.M,
                                                          cfg_.proposal.t0, cfg_.times.back(),
                                                          cfg_.N}));
  }
}

Grid1D Generic1dSampler::grid_for(std::span<const Vec2> path) const {
  double lo = cfg_.proposal.x0[0], hi = lo;
  for (const auto& p : path) {
    lo = std::min(lo, p[0]);
    hi = std::max(hi, p[0]);
  }
  Grid1D g = padded_grid(lo, hi, cfg_.pad_sq_diffusion, cfg_.M, cfg_.proposal.t0,
                         cfg_.times.back(), cfg_.N);
  if (cfg_.proposal.kind == ProposalKind::LogisticBrownian) {
    g.x_min = std::max(g.x_min, 1e-6);
    g.x_max = std::min(g.x_max, 1.0 - 1e-6);
  }
  g.validate();
  return g;
}

PathSample Generic1dSampler::sample(std::uint64_t root, std::size_t index) const {
  return run_attempts(cfg_.proposal, cfg_.times, cfg_.retries, root, index,
                      [&](const std::vector<Vec2>& path) -> Prepared {
    std::shared_ptr<const RatioField> field =
        fixed_ ? fixed_ : std::make_shared<RatioField>(solve_on(grid_for(path)));
    const BoundSpec bound = cfg_.bound_kind == BoundSpec::Kind::User
                                ? user_bound(cfg_.bound_value)
                                : empirical_bound(field_max(field->values), cfg_.bound_safety);
    return {field_evaluator(field), bound};
  });
}

// -- CSV ---------------------------------------------------------------------

void write_path_csv(const PathSample& p, std::ostream& out) {
  if (p.dim == 1) {
    out << "t,proposal,ratio,uniform,decision,output\n";
  } else {
    out << "t,proposal_1,proposal_2,ratio,uniform,decision,output_1,output_2\n";
  }
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    out << fmt(p.times[i]) << ',' << fmt(p.proposal[i][0]);
    if (p.dim == 2) out << ',' << fmt(p.proposal[i][1]);
    out << ',' << fmt(p.ratio[i]) << ',' << fmt(p.uniforms[i]) << ',' << to_string(p.decisions[i])
        << ',' << fmt(p.output[i][0]);
    if (p.dim == 2) out << ',' << fmt(p.output[i][1]);
    out << '\n';
  }
}

}  // namespace fpr
