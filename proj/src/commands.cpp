#include "fpr/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "fpr/io.hpp"
#include "fpr/kernels.hpp"
#include "fpr/oracle.hpp"
#include "fpr/ratio_pde.hpp"
#include "fpr/verification.hpp"

namespace fpr {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;
constexpr int kCsvSchemaVersion = 1;

WfDriftConvention convention_of(const ExperimentConfig& c) {
  return c.convention == "printed" ? WfDriftConvention::AsPrinted
                                   : WfDriftConvention::ItoConsistent;
}

DomainMode domain_of(const ExperimentConfig& c) { return domain_mode_from_id(c.domain); }

int jobs_of(const ExperimentConfig& c, const CommandOptions& o) { return o.jobs.value_or(c.jobs); }

struct Artifacts {
  json list = json::array();
  std::filesystem::path dir;

  void add(const std::string& file, const std::string& content, std::string columns) {
    write_text_file(dir / file, content);
    list.push_back({{"file", file}, {"columns", std::move(columns)}, {"schema_version", kCsvSchemaVersion}});
  }
};

json grid_json(const Grid1D& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"M", g.M}, {"t0", g.t0}, {"T", g.T}, {"N", g.N},
          {"h", g.h()}, {"k", g.k()}};
}

json grid_json(const Grid2D& g) {
  return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min}, {"y_max", g.y_max},
          {"Mx", g.Mx}, {"My", g.My}, {"t0", g.t0}, {"T", g.T}, {"N", g.N}, {"dx", g.dx()},
          {"dy", g.dy()}, {"dt", g.dt()}};
}

json bound_json(const BoundSpec& b) {
  return {{"kind", to_string(b.kind)}, {"value", b.value}, {"note", b.note}};
}

std::string csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream ss;
  writer(ss);
  return ss.str();
}

double fraction_above_one(const std::vector<double>& v) {
  std::size_t n = 0;
  for (double x : v) n += x > 1.0;
  return v.empty() ? 0.0 : double(n) / v.size();
}

double field_max(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

BoundSpec::Kind bound_kind_of(const ExperimentConfig& c, BoundSpec::Kind fallback) {
  if (c.bound_kind == "analytic") return BoundSpec::Kind::Analytic;
  if (c.bound_kind == "empirical") return BoundSpec::Kind::Empirical;
  if (c.bound_kind == "user") return BoundSpec::Kind::User;
  return fallback;
}

void require_process(const ExperimentConfig& c, std::initializer_list<const char*> ok,
                     const std::string& command) {
  for (const char* p : ok) {
    if (c.process == p) return;
  }
  throw ConfigError("params.process",
                    "command " + command + " does not support process '" + c.process + "'");
}

std::size_t time_index(const std::vector<double>& times, double t) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  throw ConfigError("time.compare_time", "compare time " + fmt(t) + " is not a path time");
}

json base_manifest(const std::string& command, const ExperimentConfig* cfg,
                   const CommandOptions& o) {
  json m;
  m["tool"] = "fpr";
  m["manifest_version"] = kManifestVersion;
  m["command"] = command;
  m["config"] = cfg ? cfg->to_json() : json(nullptr);
  m["options"] = {{"normalized", o.normalized}, {"problem", o.problem}};
  m["seeds"] = {{"root", cfg ? json(cfg->seed) : json(nullptr)},
                {"generator", "splitmix64-counter"},
                {"streams", {"path", "uniform", "bridge", "simulation"}}};
  m["kernel_isa"] = std::string(kernels::isa_name(kernels::active_isa()));
  return m;
}

// -- solve-ratio --------------------------------------------------------------

void solve_ratio(const ExperimentConfig& c, const CommandOptions& o, json& m, Artifacts& art) {
  const auto times = c.path_times();
  auto emit_1d = [&](const RatioField& field, const std::vector<Vec2>* path) {
    art.add("field.csv", csv([&](auto& s) { write_field_csv(field, s); }), "t,x,V");
    if (o.normalized) {
      art.add("field_norm.csv", csv([&](auto& s) { write_field_csv(max_normalized(field), s); }),
              "t,x,V");
    }
    if (path) {
      std::ostringstream s;
      s << "t,proposal,V\n";
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double x = (*path)[i][0];
        const bool inside = x >= field.grid.x_min && x <= field.grid.x_max;
        s << fmt(times[i]) << ',' << fmt(x) << ','
          << (inside ? fmt(eval_field(field, x, times[i])) : std::string("nan")) << '\n';
      }
      art.add("path_ratio.csv", s.str(), "t,proposal,V");
    }
    m["grid"] = grid_json(field.grid);
    m["summary"] = {{"field_max", field_max(field.values)},
                    {"field_min", *std::min_element(field.values.begin(), field.values.end())},
                    {"fraction_above_one", fraction_above_one(field.values)},
                    {"effective_start", field.effective_start}};
  };

  if (c.process == "ou") {
    OuSamplerConfig sc = ou_sampler_config(c);
    sc.mode = OuSamplerConfig::RatioMode::Pde;
    OuSampler s(sc);
    const ProposalSpec prop{ProposalKind::Brownian, 1, c.sigma, 0.0, 0.0, {c.x0, 0.0}};
    const auto path = sample_proposal_path(prop, times, path_seed(c.seed, 0, 0));
    const RatioField field = s.fixed_field() ? *s.fixed_field() : s.solve_for(path);
    emit_1d(field, &path);
    m["bound"] = bound_json(analytic_ou_bound(c.beta, c.bound_x_max, c.x0, times.back()));
  } else if (c.process == "wf1d") {
    Wf1dSampler s(wf1d_sampler_config(c));
    const auto path = sample_proposal_path(s.proposal(), times, path_seed(c.seed, 0, 0));
    const RatioField field = s.fixed_field() ? *s.fixed_field() : s.solve_on(s.grid_for(path));
    emit_1d(field, &path);
    m["coordinates"] = "x column is y = sigmoid(asin(2 x_wf - 1))";
    m["bound"] = bound_json(empirical_bound(field_max(field.values), c.bound_safety));
  } else if (c.process == "custom-1d") {
    Generic1dSamplerConfig gc = generic_sampler_config(c);
    Generic1dSampler s(gc);
    const auto path = sample_proposal_path(gc.proposal, times, path_seed(c.seed, 0, 0));
    const RatioField field = s.fixed_field() ? *s.fixed_field() : s.solve_on(s.grid_for(path));
    emit_1d(field, &path);
  } else {
    Wf2dSamplerConfig wc = wf2d_sampler_config(c);
    Wf2dSampler s(wc);
    RatioField2D field;
    if (s.fixed_field()) {
      field = *s.fixed_field();
    } else {
      const ProposalSpec prop{ProposalKind::LogisticBrownian, 2, 1.0, c.rho, 0.0,
                              {sigmoid(wf_to_logit(c.x0)), sigmoid(wf_to_logit(c.x0_2))}};
      const auto path = sample_proposal_path(prop, times, path_seed(c.seed, 0, 0));
      field = solve_ratio_2d(s.coefficients(), s.grid_for(path), wc.order);
    }
    std::vector<int> levels = c.snapshots;
    for (int l : levels) {
      if (l > field.grid.N) {
        throw ConfigError("time.snapshots", "snapshot level " + std::to_string(l) +
                                                " exceeds the number of time steps " +
                                                std::to_string(field.grid.N));
      }
    }
    art.add("field.csv", csv([&](auto& st) { write_field2d_csv(field, st, levels); }), "t,x,y,V");
    if (o.normalized) {
      art.add("field_norm.csv",
              csv([&](auto& st) { write_field2d_csv(max_normalized(field), st, levels); }),
              "t,x,y,V");
    }
    if (c.binary) {
      std::ostringstream bin(std::ios::binary);
      write_field2d_binary(field, bin);
      write_text_file(art.dir / "field.bin", bin.str());
      art.list.push_back({{"file", "field.bin"}, {"columns", "binary"}, {"schema_version", 1}});
    }
    m["grid"] = grid_json(field.grid);
    m["coordinates"] = "x, y columns are logit coordinates b = asin(2 x_wf - 1)";
    m["summary"] = {{"field_max", field_max(field.values)},
                    {"fraction_above_one", fraction_above_one(field.values)},
                    {"effective_start", field.effective_start}};
  }
}

// -- sample -------------------------------------------------------------------

void sample(const ExperimentConfig& c, const CommandOptions& o, json& m, Artifacts& art) {
  auto sampler = make_sampler(c);
  const auto paths = sample_paths_report(*sampler, c.seed, static_cast<std::size_t>(c.n_paths),
                                         jobs_of(c, o));
  const bool two_d = c.process == "wf2d";
  const std::string cols = two_d ? "t,proposal_1,proposal_2,ratio,uniform,decision,output_1,output_2"
                                 : "t,proposal,ratio,uniform,decision,output";
  double cmin = paths.front().bound_c, cmax = cmin;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "paths/path_%05zu.csv", i);
    art.add(name, csv([&](auto& s) { write_path_csv(paths[i], s); }), cols);
    cmin = std::min(cmin, paths[i].bound_c);
    cmax = std::max(cmax, paths[i].bound_c);
  }
  const SamplerStats st = summarize(paths);
  json summary = {{"paths", st.paths},
                  {"points", st.points},
                  {"accepted", st.accepted},
                  {"clamped", st.clamped},
                  {"acceptance_rate", st.acceptance_rate()},
                  {"attempts", st.attempts},
                  {"retries", st.attempts - st.paths},
                  {"failed_paths", st.failed},
                  {"rejected_fraction", st.points ? 1.0 - st.acceptance_rate() : 0.0},
                  {"bound_min", cmin},
                  {"bound_max", cmax}};
  if (auto* ws = dynamic_cast<const Wf1dSampler*>(sampler.get()); ws && ws->fixed_field()) {
    summary["fraction_above_one"] = fraction_above_one(ws->fixed_field()->values);
  }
  if (auto* ws = dynamic_cast<const Wf2dSampler*>(sampler.get()); ws && ws->fixed_field()) {
    summary["fraction_above_one"] = fraction_above_one(ws->fixed_field()->values);
  }
  art.add("summary.json", summary.dump(2) + "\n", "json");
  m["summary"] = summary;
  std::string kind = c.bound_kind.empty() ? (c.process == "ou" ? "analytic" : "empirical")
                                          : c.bound_kind;
  m["bound"] = {{"kind", kind}, {"min", cmin}, {"max", cmax}};
}

// -- validate-ou --------------------------------------------------------------

void validate_ou(const ExperimentConfig& c, const CommandOptions&, json& m, Artifacts& art) {
  if (c.betas.empty()) throw ConfigError("sweep.betas", "validate-ou needs a non-empty sweep.betas");
  const auto times = c.path_times();
  const ProposalSpec prop{ProposalKind::Brownian, 1, c.sigma, 0.0, 0.0, {c.x0, 0.0}};
  const auto path = sample_proposal_path(prop, times, path_seed(c.seed, 0, 0));
  std::ostringstream s;
  s << "beta,max_abs_error,mean_abs_error,n_points\n";
  json rows = json::array();
  double prev = -1.0;
  bool monotone = true;
  for (double beta : c.betas) {
    OuSamplerConfig sc = ou_sampler_config(c);
    sc.beta = beta;
    sc.mode = OuSamplerConfig::RatioMode::Pde;
    OuSampler sampler(sc);
    const RatioField field = sampler.fixed_field() ? *sampler.fixed_field() : sampler.solve_for(path);
    double mx = 0.0, sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] <= 0.0) continue;
      const double e = std::abs(eval_field(field, path[i][0], times[i]) -
                                ou_exact_ratio(beta, c.sigma, c.x0, path[i][0], times[i]));
      mx = std::max(mx, e);
      sum += e;
      ++n;
    }
    s << fmt(beta) << ',' << fmt(mx) << ',' << fmt(sum / n) << ',' << n << '\n';
    rows.push_back({{"beta", beta}, {"max_abs_error", mx}});
    if (prev >= 0.0 && !(mx > prev)) monotone = false;
    prev = mx;
  }
  art.add("validate_ou.csv", s.str(), "beta,max_abs_error,mean_abs_error,n_points");
  m["summary"] = {{"rows", rows}, {"max_error_increasing_in_beta", monotone}};
}

// -- mc-compare ---------------------------------------------------------------

void mc_compare(const ExperimentConfig& c, const CommandOptions& o, json& m, Artifacts& art) {
  std::string mode = c.mode;
  if (mode.empty()) {
    if (c.process == "ou") mode = c.ratio_mode == "exact" ? "ou-exact" : "ou-pde";
    if (c.process == "wf1d") mode = "wf1d";
  }
  if (mode.empty()) throw ConfigError("run.mode", "mc-compare needs run.mode for this process");
  const bool ou = mode != "wf1d";
  if (ou && c.process != "ou") throw ConfigError("run.mode", "mode " + mode + " needs process ou");
  if (!ou && c.process != "wf1d") throw ConfigError("run.mode", "mode wf1d needs process wf1d");

  ExperimentConfig cc = c;
  if (ou) cc.ratio_mode = mode == "ou-exact" ? "exact" : "pde";
  auto sampler = make_sampler(cc);
  const auto times = cc.path_times();
  const double t_cmp = cc.compare_time.value_or(cc.t_end);
  const std::size_t idx = time_index(times, t_cmp);
  const std::size_t target = cc.pool_size > 0 ? cc.pool_size : (ou ? 20000 : 3000);
  const std::size_t batch = 1000;

  std::vector<double> pool;
  std::size_t next = 0, points = 0, accepted = 0;
  while (pool.size() < target) {
    if (next >= 2000 * batch) {
      fail(ErrorKind::SamplingFailure, "mc-compare could not reach the requested pool size");
    }
    const auto paths = sample_paths(*sampler, cc.seed, batch, jobs_of(cc, o), next);
    next += batch;
    for (const auto& p : paths) {
      points += p.decisions.size();
      accepted += p.accepted_count();
      if (p.decisions[idx] != Decision::Accepted) continue;
      const double v = p.proposal[idx][0];
      pool.push_back(ou ? v : wf_from_logit(logit(v)));
    }
  }
  const auto sample_dist = EmpiricalDistribution::from(pool);
  art.add("accepted.csv", csv([&](auto& s) { write_distribution_csv(sample_dist, s); }), "value");

  json report = {{"mode", mode}, {"compare_time", t_cmp}, {"n_samples", sample_dist.count()},
                 {"paths_used", next}, {"acceptance_rate", double(accepted) / points}};
  double ks = 0.0, threshold = 0.0;
  if (ou) {
    const GaussianMoments g = ou_moments(cc.beta, cc.sigma, cc.x0, t_cmp);
    const double sd = std::sqrt(g.variance);
    ks = ks_statistic(sample_dist, [&](double x) { return normal_cdf(x, g.mean, sd); });
    threshold = cc.ks_threshold.value_or(mode == "ou-exact" ? 0.015 : 0.03);
    report["reference"] = {{"kind", "analytic-gaussian"}, {"mean", g.mean}, {"variance", g.variance}};
  } else {
    EulerOptions eo;
    eo.policy = cc.em_policy == "absorb" ? BoundaryPolicy::Absorb
                : cc.em_policy == "clip" ? BoundaryPolicy::Clip
                                         : BoundaryPolicy::None;
    eo.jobs = jobs_of(cc, o);
    const auto em = euler_maruyama(wf1d_model(cc.gamma), cc.x0, t_cmp, cc.em_dt,
                                   static_cast<std::size_t>(cc.em_paths), cc.seed ^ 0x5eedULL, eo);
    art.add("reference.csv", csv([&](auto& s) { write_distribution_csv(em.distribution, s); }),
            "value");
    ks = ks_statistic(sample_dist, em.distribution);
    threshold = cc.ks_threshold.value_or(0.05);
    report["reference"] = {{"kind", "euler-maruyama"}, {"dt", cc.em_dt}, {"paths", em.n_paths},
                           {"absorbed", em.absorbed}, {"policy", cc.em_policy},
                           {"n_reference", em.distribution.count()}};
  }
  report["ks"] = ks;
  report["threshold"] = threshold;
  report["pass"] = ks <= threshold;
  art.add("ks_report.json", report.dump(2) + "\n", "json");
  m["summary"] = report;
}

}  // namespace

OuSamplerConfig ou_sampler_config(const ExperimentConfig& c) {
  OuSamplerConfig s;
  s.beta = c.beta;
  s.sigma = c.sigma;
  s.x0 = c.x0;
  s.times = c.path_times();
  s.mode = c.ratio_mode == "exact" ? OuSamplerConfig::RatioMode::Exact
                                   : OuSamplerConfig::RatioMode::Pde;
  s.domain = domain_of(c);
  s.M = c.M;
  s.N = c.N;
  s.pad = c.pad;
  s.bound_kind = bound_kind_of(c, BoundSpec::Kind::Analytic);
  s.bound_x_max = c.bound_x_max;
  s.bound_value = c.bound_value;
  s.bound_safety = c.bound_safety;
  s.retries = c.retries;
  return s;
}

Wf1dSamplerConfig wf1d_sampler_config(const ExperimentConfig& c) {
  if (!c.bound_kind.empty() && c.bound_kind != "empirical") {
    throw ConfigError("bound.kind", "wf1d supports only the empirical bound");
  }
  Wf1dSamplerConfig s;
  s.gamma = c.gamma;
  s.x0 = c.x0;
  s.times = c.path_times();
  s.domain = domain_of(c);
  s.margin = std::numbers::pi / 2 - c.window_cap();
  s.M = c.M;
  s.N = c.N;
  s.convention = convention_of(c);
  s.force_identity = c.identity;
  s.bound_safety = c.bound_safety;
  s.retries = c.retries;
  return s;
}

Wf2dSamplerConfig wf2d_sampler_config(const ExperimentConfig& c) {
  if (!c.bound_kind.empty() && c.bound_kind != "empirical") {
    throw ConfigError("bound.kind", "wf2d supports only the empirical bound");
  }
  Wf2dSamplerConfig s;
  s.h_sel = c.h;
  s.x0 = {c.x0, c.x0_2};
  s.rho = c.rho;
  s.times = c.path_times();
  s.domain = domain_of(c);
  s.margin = std::numbers::pi / 2 - c.window_cap();
  s.M = c.M2;
  s.N = c.N2;
  s.convention = convention_of(c);
  s.order = c.order == "second" ? SpatialOrder::Second : SpatialOrder::Compact4;
  s.bound_safety = c.bound_safety;
  s.retries = c.retries;
  return s;
}

Generic1dSamplerConfig generic_sampler_config(const ExperimentConfig& c) {
  Generic1dSamplerConfig g;
  SdeModel target;
  if (c.target == "ou") {
    target = ou_model(c.beta, c.sigma);
  } else if (c.target == "brownian") {
    target = brownian_model(c.sigma);
  } else if (c.target == "logistic-brownian") {
    target = logistic_brownian_model();
  } else {
    target = wf1d_transformed_model(c.gamma, convention_of(c));
  }
  const bool logistic = c.proposal == "logistic-brownian";
  const SdeModel proposal = logistic ? logistic_brownian_model() : brownian_model(c.sigma);
  const ClosedFormDensity density = logistic ? logistic_brownian_density(0.0, c.x0)
                                             : ou_transition_density(0.0, c.sigma, c.x0);
  g.coeffs = build_ratio_pde_1d(target, proposal, density);
  g.proposal = {logistic ? ProposalKind::LogisticBrownian : ProposalKind::Brownian, 1,
                logistic ? 1.0 : c.sigma, 0.0, 0.0, {c.x0, 0.0}};
  g.times = c.path_times();
  g.domain = domain_of(c);
  if (g.domain == DomainMode::Fixed) {
    if (!c.x_min || !c.x_max) {
      throw ConfigError("grid.x_min", "custom-1d with a fixed domain needs grid.x_min and grid.x_max");
    }
    g.x_min = *c.x_min;
    g.x_max = *c.x_max;
  }
  g.M = c.M;
  g.N = c.N;
  g.pad_sq_diffusion = logistic ? 1.0 / 16.0 : c.sigma * c.sigma;
  g.bound_kind = bound_kind_of(c, BoundSpec::Kind::Empirical);
  g.bound_value = c.bound_value;
  g.bound_safety = c.bound_safety;
  g.retries = c.retries;
  return g;
}

std::unique_ptr<PathSampler> make_sampler(const ExperimentConfig& c) {
  if (c.process == "ou") return std::make_unique<OuSampler>(ou_sampler_config(c));
  if (c.process == "wf1d") return std::make_unique<Wf1dSampler>(wf1d_sampler_config(c));
  if (c.process == "wf2d") return std::make_unique<Wf2dSampler>(wf2d_sampler_config(c));
  return std::make_unique<Generic1dSampler>(generic_sampler_config(c));
}

json run_command(const std::string& command, const ExperimentConfig& cfg,
                 const CommandOptions& options) {
  if (command == "convergence") return run_convergence(options);
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = cfg;
  if (options.jobs) c.jobs = *options.jobs;
  json m = base_manifest(command, &c, options);
  Artifacts art{json::array(), options.out};
  if (command == "solve-ratio") {
    solve_ratio(c, options, m, art);
  } else if (command == "sample") {
    sample(c, options, m, art);
  } else if (command == "validate-ou") {
    require_process(c, {"ou"}, command);
    validate_ou(c, options, m, art);
  } else if (command == "mc-compare") {
    require_process(c, {"ou", "wf1d"}, command);
    mc_compare(c, options, m, art);
  } else {
    fail(ErrorKind::InvalidParameter, "unknown command '" + command + "'");
  }
  m["artifacts"] = art.list;
  m["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  write_text_file(options.out / "manifest.json", m.dump(2) + "\n");
  return m;
}

json run_convergence(const CommandOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const ConvergenceTable t = convergence_study(options.problem);
  json m = base_manifest("convergence", nullptr, options);
  Artifacts art{json::array(), options.out};
  art.add("convergence.csv", csv([&](auto& s) { write_convergence_csv(t, s); }),
          "sweep,level,h,k,error,order");
  m["summary"] = {{"problem", t.problem}, {"space_order", t.fitted_order("space")},
                  {"time_order", t.fitted_order("time")}};
  m["artifacts"] = art.list;
  m["timings"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  write_text_file(options.out / "manifest.json", m.dump(2) + "\n");
  return m;
}

json rerun_from_manifest(const json& manifest, const CommandOptions& options) {
  std::string command;
  CommandOptions o = options;
  try {
    command = manifest.at("command").get<std::string>();
    o.normalized = manifest.at("options").at("normalized").get<bool>();
    o.problem = manifest.at("options").at("problem").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("malformed manifest: ") + e.what());
  }
  if (command == "convergence") return run_convergence(o);
  return run_command(command, ExperimentConfig::from_json(manifest.at("config")), o);
}

}  // namespace fpr
