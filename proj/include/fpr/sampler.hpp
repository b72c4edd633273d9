#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fpr/errors.hpp"
#include "fpr/process_catalog.hpp"
#include "fpr/solver1d.hpp"
#include "fpr/solver2d.hpp"

namespace fpr {

enum class ProposalKind { Brownian, LogisticBrownian };

/// "brownian" or "logistic-brownian"; throws UnknownProcess otherwise.
ProposalKind proposal_from_id(std::string_view id);
std::string_view proposal_id(ProposalKind kind);

/// Proposal with exact transition sampling. For the logistic kind the state is
/// y = sigmoid(z) where z is Brownian with variance sigma^2 per unit time; in
/// 2D the driving components have correlation rho.
struct ProposalSpec {
  ProposalKind kind = ProposalKind::Brownian;
  int dim = 1;
  double sigma = 1.0;
  double rho = 0.0;
  double t0 = 0.0;
  Vec2 x0{};
};

/// Exact draws at `times` (non-decreasing, all >= t0) from the Path stream of `seed`.
std::vector<Vec2> sample_proposal_path(const ProposalSpec& proposal,
                                       std::span<const double> times, std::uint64_t seed);

enum class Decision { Accepted, Rejected, ClampedRejected };
std::string_view to_string(Decision d);

/// Accept iff u <= max(ratio, 0) / c; negative ratios are clamped and rejected.
Decision decide(double ratio, double u, double c);

struct BoundSpec {
  enum class Kind { Analytic, Empirical, User };
  Kind kind = Kind::User;
  double value = 1.0;
  std::string note;
};
std::string_view to_string(BoundSpec::Kind k);

BoundSpec analytic_ou_bound(double beta, double x_max, double x0, double T);
/// c = max(1, max_ratio) * safety.
BoundSpec empirical_bound(double max_ratio, double safety = 1.05);
BoundSpec user_bound(double c);

struct PathSample {
  int dim = 1;
  std::vector<double> times;
  std::vector<Vec2> proposal;
  std::vector<double> ratio;
  std::vector<double> uniforms;
  std::vector<Decision> decisions;
  /// Bridge-infilled output; entries at and beyond `valid_length` are NaN
  /// (the path is truncated after its last accepted point).
  std::vector<Vec2> output;
  std::size_t valid_length = 0;
  std::uint64_t seed = 0;
  double bound_c = 1.0;
  int attempts = 1;
  /// Set by sample_paths_report when every attempt was rejected; the record
  /// then holds the last attempt.
  bool failed = false;

  std::size_t accepted_count() const;
};

/// SamplingFailure carrying the last fully rejected attempt.
class PathSamplingFailure : public Error {
 public:
  PathSamplingFailure(const std::string& what, PathSample last)
      : Error(ErrorKind::SamplingFailure, what), last_(std::move(last)) {}
  const PathSample& last_attempt() const noexcept { return last_; }

 private:
  PathSample last_;
};

/// Ratio at (t, x) where x is in proposal coordinates.
using RatioEvaluator = std::function<double(double t, const Vec2& x)>;

RatioEvaluator field_evaluator(std::shared_ptr<const RatioField> field);
RatioEvaluator field_evaluator(std::shared_ptr<const RatioField2D> field);

/// Draws uniforms from the Uniform stream of `seed` and applies decide().
/// Output is left equal to the proposal; call bridge_infill next.
PathSample rejection_pass(std::span<const double> times, std::vector<Vec2> proposal, int dim,
                          const RatioEvaluator& ratio, const BoundSpec& bound,
                          std::uint64_t seed);

/// Fills rejected points with exact proposal bridges (Bridge stream of
/// path.seed). A rejected first stretch is anchored at (t0, x0); a rejected
/// tail is truncated. Throws WholePathRejected if nothing was accepted.
void bridge_infill(PathSample& path, const ProposalSpec& proposal);

/// Seed of attempt `attempt` for path `index` under a root seed.
std::uint64_t path_seed(std::uint64_t root, std::uint64_t index, std::uint64_t attempt);

enum class DomainMode { Path, Fixed };
std::string_view to_string(DomainMode m);
DomainMode domain_mode_from_id(std::string_view id);

struct SamplerStats {
  std::size_t paths = 0;
  std::size_t points = 0;
  std::size_t accepted = 0;
  std::size_t clamped = 0;
  std::size_t attempts = 0;
  std::size_t failed = 0;
  double acceptance_rate() const { return points ? double(accepted) / points : 0.0; }
};
SamplerStats summarize(std::span<const PathSample> paths);

/// A configured pipeline: sample(root, i) is a pure function of its arguments.
class PathSampler {
 public:
  virtual ~PathSampler() = default;
  virtual PathSample sample(std::uint64_t root, std::size_t index) const = 0;
};

/// Runs sampler.sample(root, first + i) for i in [0, n) on up to `jobs` threads.
std::vector<PathSample> sample_paths(const PathSampler& sampler, std::uint64_t root,
                                     std::size_t n, int jobs = 1, std::size_t first = 0);

/// As sample_paths, but a path whose retries run out is returned with
/// `failed` set instead of aborting the batch.
std::vector<PathSample> sample_paths_report(const PathSampler& sampler, std::uint64_t root,
                                            std::size_t n, int jobs = 1, std::size_t first = 0);

// -- O-U target, Brownian proposal -----------------------------------------

struct OuSamplerConfig {
  double beta = 0.05;
  double sigma = 1.0;
  double x0 = 0.0;
  std::vector<double> times;  // path times; start time is 0
  enum class RatioMode { Exact, Pde } mode = RatioMode::Pde;
  DomainMode domain = DomainMode::Path;
  int M = 300;
  int N = 200;
  bool pad = true;
  /// Default bound: analytic C(beta) with this x_max.
  BoundSpec::Kind bound_kind = BoundSpec::Kind::Analytic;
  double bound_x_max = 2.0;
  double bound_value = 1.0;  // user kind
  double bound_safety = 1.05;  // empirical kind
  int retries = 50;
};

class OuSampler final : public PathSampler {
 public:
  explicit OuSampler(OuSamplerConfig cfg);
  PathSample sample(std::uint64_t root, std::size_t index) const override;
  const OuSamplerConfig& config() const { return cfg_; }
  /// Field for the fixed domain mode (null otherwise).
  std::shared_ptr<const RatioField> fixed_field() const { return fixed_; }
  /// Solve on the grid that path mode would use for `path`.
  RatioField solve_for(std::span<const Vec2> path) const;
  Grid1D grid_for(std::span<const Vec2> path) const;

 private:
  OuSamplerConfig cfg_;
  std::shared_ptr<const RatioField> fixed_;
};

// -- one-dimensional Wright-Fisher ------------------------------------------

struct Wf1dSamplerConfig {
  double gamma = 1.0;
  double x0 = 0.5;             // allele frequency
  std::vector<double> times;   // start time is 0
  DomainMode domain = DomainMode::Path;
  double margin = 0.02;        // logit window |b| <= pi/2 - margin
  int M = 400;
  int N = 400;
  WfDriftConvention convention = WfDriftConvention::ItoConsistent;
  bool force_identity = false; // target replaced by the proposal itself
  double bound_safety = 1.05;
  int retries = 50;
};

class Wf1dSampler final : public PathSampler {
 public:
  explicit Wf1dSampler(Wf1dSamplerConfig cfg);
  /// Output column is in allele-frequency coordinates.
  PathSample sample(std::uint64_t root, std::size_t index) const override;
  const Wf1dSamplerConfig& config() const { return cfg_; }
  std::shared_ptr<const RatioField> fixed_field() const { return fixed_; }
  RatioField solve_on(const Grid1D& grid) const;
  Grid1D grid_for(std::span<const Vec2> path) const;
  ProposalSpec proposal() const;

 private:
  Wf1dSamplerConfig cfg_;
  RatioCoefficients1D coeffs_;
  std::shared_ptr<const RatioField> fixed_;
};

// -- two-dimensional Wright-Fisher ------------------------------------------

struct Wf2dSamplerConfig {
  double h_sel = 1.0;
  Vec2 x0{0.5, 0.5};
  double rho = 0.0;
  std::vector<double> times;
  DomainMode domain = DomainMode::Path;
  double margin = 0.05;
  int M = 40;
  int N = 40;  // raised automatically to honour dt <= min(dx, dy)
  WfDriftConvention convention = WfDriftConvention::ItoConsistent;
  SpatialOrder order = SpatialOrder::Compact4;
  double bound_safety = 1.05;
  int retries = 50;
};

class Wf2dSampler final : public PathSampler {
 public:
  explicit Wf2dSampler(Wf2dSamplerConfig cfg);
  PathSample sample(std::uint64_t root, std::size_t index) const override;
  const Wf2dSamplerConfig& config() const { return cfg_; }
  std::shared_ptr<const RatioField2D> fixed_field() const { return fixed_; }
  Grid2D grid_for(std::span<const Vec2> path) const;
  RatioCoefficients2D coefficients() const { return coeffs_; }

 private:
  Wf2dSamplerConfig cfg_;
  RatioCoefficients2D coeffs_;
  std::shared_ptr<const RatioField2D> fixed_;
};

// -- generic one-dimensional pair ---------------------------------------------

struct Generic1dSamplerConfig {
  RatioCoefficients1D coeffs;
  ProposalSpec proposal;
  std::vector<double> times;  // start time is proposal.t0
  DomainMode domain = DomainMode::Path;
  int M = 300;
  int N = 200;
  /// Squared diffusion used for the padding width in path mode.
  double pad_sq_diffusion = 1.0;
  /// Grid range for the fixed domain mode.
  double x_min = -5.0, x_max = 5.0;
  BoundSpec::Kind bound_kind = BoundSpec::Kind::Empirical;
  double bound_value = 1.0;
  double bound_safety = 1.05;
  int retries = 50;
};

class Generic1dSampler final : public PathSampler {
 public:
  explicit Generic1dSampler(Generic1dSamplerConfig cfg);
  PathSample sample(std::uint64_t root, std::size_t index) const override;
  std::shared_ptr<const RatioField> fixed_field() const { return fixed_; }
  Grid1D grid_for(std::span<const Vec2> path) const;
  RatioField solve_on(const Grid1D& grid) const { return solve_ratio_1d(cfg_.coeffs, grid); }

 private:
  Generic1dSamplerConfig cfg_;
  std::shared_ptr<const RatioField> fixed_;
};

/// Header `t,proposal,ratio,uniform,decision,output`; in 2D the proposal and
/// output columns are suffixed _1 and _2.
void write_path_csv(const PathSample& path, std::ostream& out);

/// Allele frequency from logit coordinate: (1 + sin b) / 2.
double wf_from_logit(double b);
/// Logit coordinate from allele frequency: asin(2x - 1).
double wf_to_logit(double x);

}  // namespace fpr
