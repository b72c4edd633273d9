// Acceptance checks 1-12. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpr/commands.hpp"
#include "fpr/config.hpp"
#include "fpr/oracle.hpp"
#include "fpr/process_catalog.hpp"
#include "fpr/ratio_pde.hpp"
#include "fpr/sampler.hpp"
#include "fpr/solver1d.hpp"
#include "fpr/solver2d.hpp"
#include "fpr/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fpr;

namespace {

const fs::path kCli = FPR_CLI_PATH;
const fs::path kConfigs = FPR_CONFIG_DIR;
const fs::path kScratch = fs::path(FPR_TEST_SCRATCH) / "acceptance";

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path fresh(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

json run(const std::string& command, const std::string& config, const std::string& name,
         const std::function<void(ExperimentConfig&)>& edit = {}) {
  ExperimentConfig c = ExperimentConfig::load(kConfigs / config);
  if (edit) edit(c);
  CommandOptions o;
  o.out = fresh(name);
  return run_command(command, c, o);
}

std::vector<double> times_to(double T, int n) {
  std::vector<double> t;
  for (int i = 1; i <= n; ++i) t.push_back(T * i / n);
  return t;
}

double acceptance_of(const std::vector<PathSample>& paths) {
  return summarize(paths).acceptance_rate();
}

// 1. target == proposal
Outcome identity() {
  const auto ou0 = ou_model(0.0, 1.0), bm = brownian_model(1.0);
  const auto coeffs = build_ratio_pde_1d(ou0, bm, ou_transition_density(0.0, 1.0, 0.0));
  const Grid1D g = padded_grid(-3.0, 3.0, 1.0, 300, 0.0, 1.0, 200);
  const auto f = solve_ratio_1d(coeffs, g);
  double worst = 0.0;
  for (double v : f.values) worst = std::max(worst, std::abs(v - 1.0));

  Generic1dSamplerConfig sc;
  sc.coeffs = coeffs;
  sc.times = times_to(1.0, 50);
  sc.bound_kind = BoundSpec::Kind::User;
  sc.bound_value = 1.0;
  const double rate = acceptance_of(sample_paths(Generic1dSampler(sc), 1, 100));
  return {worst <= 1e-10 && rate == 1.0,
          "max|V-1|=" + num(worst) + " acceptance=" + num(rate)};
}

// 2. PDE ratio vs closed form along one proposal path
Outcome exact_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const json m = run("validate-ou", "ou_validate.conf", "c2");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double err005 = -1.0;
  for (const auto& r : m.at("summary").at("rows")) {
    if (r.at("beta").get<double>() == 0.05) err005 = r.at("max_abs_error").get<double>();
  }
  const bool monotone = m.at("summary").at("max_error_increasing_in_beta").get<bool>();
  return {err005 >= 0.0 && err005 <= 0.05 && monotone && secs < 10.0,
          "max_err(0.05)=" + num(err005) + " monotone=" + (monotone ? "yes" : "no") +
              " runtime=" + num(secs) + "s"};
}

// 3. convergence orders
Outcome scheme_orders() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cn = convergence_study("cn1d-mms");
  const auto heat = convergence_study("adi2d-heat");
  const double diff = adi_vs_cn_separable_difference();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double h1 = cn.fitted_order("space"), k1 = cn.fitted_order("time");
  const double h2 = heat.fitted_order("space"), k2 = heat.fitted_order("time");
  return {h1 >= 1.9 && k1 >= 1.9 && h2 >= 2.0 && k2 >= 1.9 && diff <= 1e-6 && secs < 60.0,
          "cn1d h=" + num(h1) + " k=" + num(k1) + "; adi2d h=" + num(h2) + " k=" + num(k2) +
              "; separable diff=" + num(diff) + "; runtime=" + num(secs) + "s"};
}

// 4. beta = 25
Outcome large_beta() {
  OuSamplerConfig sc;
  sc.beta = 25.0;
  sc.times = times_to(1.0, 50);
  sc.domain = DomainMode::Fixed;
  const OuSampler fixed(sc);
  const RatioField& f = *fixed.fixed_field();
  double vmax = 0.0;
  for (int j = 1; j < f.grid.M; ++j) vmax = std::max(vmax, f.at(f.grid.N, j));
  const double c = analytic_ou_bound(25.0, sc.bound_x_max, 0.0, 1.0).value;

  sc.domain = DomainMode::Path;
  sc.retries = 1;
  const auto paths = sample_paths_report(OuSampler(sc), 4, 100);
  const double rejected = 1.0 - acceptance_of(paths);
  return {vmax < 0.05 && rejected >= 0.99,
          "max interior V(T)=" + num(vmax) + " (exact V(0,1)=" +
              num(ou_exact_ratio(25.0, 1.0, 0.0, 0.0, 1.0)) + ", V/C=" + num(vmax / c) +
              ") rejected=" + num(rejected)};
}

// 5. beta = 5e-20
Outcome tiny_beta() {
  OuSamplerConfig sc;
  sc.beta = 5e-20;
  sc.times = times_to(1.0, 50);
  sc.domain = DomainMode::Fixed;
  const OuSampler sampler(sc);
  double worst = 0.0;
  for (double v : sampler.fixed_field()->values) worst = std::max(worst, std::abs(v - 1.0));
  const double rate = acceptance_of(sample_paths(sampler, 5, 200));
  return {worst <= 1e-6 && rate >= 0.999, "max|V-1|=" + num(worst) + " acceptance=" + num(rate)};
}

Outcome ks_criterion(const std::string& config, const std::string& name, double limit) {
  const auto t0 = std::chrono::steady_clock::now();
  const json s = run("mc-compare", config, name).at("summary");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ks = s.at("ks").get<double>();
  const auto n = s.at("n_samples").get<std::size_t>();
  return {ks <= limit && n >= 20000, "KS=" + num(ks) + " n=" + std::to_string(n) +
                                         " runtime=" + num(secs) + "s"};
}

// 8. Wright-Fisher against Euler-Maruyama
Outcome wright_fisher() {
  const auto t0 = std::chrono::steady_clock::now();
  const json s = run("mc-compare", "mc_wf1d.conf", "c8").at("summary");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double ks = s.at("ks").get<double>();
  const auto& ref = s.at("reference");
  return {ks <= 0.05 && ref.at("dt").get<double>() == 1e-4 &&
              ref.at("paths").get<std::size_t>() == 100000 && secs < 180.0,
          "KS=" + num(ks) + " n=" + std::to_string(s.at("n_samples").get<std::size_t>()) +
              " runtime=" + num(secs) + "s"};
}

// 9. two-dimensional trends
Outcome wf2d_trends() {
  const int M = 40;
  const Grid2D g = logit_window_grid(0.05, M, 0.0, 1.0, 20);
  const auto h1 = solve_ratio_2d(wf2d_ratio_coefficients(1.0, {0.0, 0.0}), g);
  const auto h10 = solve_ratio_2d(wf2d_ratio_coefficients(10.0, {0.0, 0.0}), g);
  const int n = g.N;
  bool monotone = true;
  int first_rise = -1;
  for (int k = M / 2; k + 1 < M; ++k) {
    if (h1.at(n, k + 1, k + 1) > h1.at(n, k, k)) {
      monotone = false;
      if (first_rise < 0) first_rise = k;
    }
  }
  const double c1 = h1.at(20, M / 2, M / 2), c10 = h10.at(20, M / 2, M / 2);
  std::string d = std::string("diagonal non-increasing=") + (monotone ? "yes" : "no");
  if (!monotone) {
    d += " (rises from node " + std::to_string(first_rise) + ": " +
         num(h1.at(n, first_rise, first_rise)) + " -> " +
         num(h1.at(n, first_rise + 1, first_rise + 1)) + ")";
  }
  d += "; centre V(h=10)=" + num(c10) + " <= V(h=1)=" + num(c1);
  return {monotone && c10 <= c1, d};
}

// 10. bound discipline
Outcome bound_discipline() {
  double worst = 0.0;
  for (double beta : {0.05, 0.5}) {
    const double c = ou_bound(beta, 2.0, 0.0, 1.0);
    const Grid1D g{-2.0, 2.0, 300, 0.0, 1.0, 200};
    const auto f = solve_ratio_1d(ou_ratio_coefficients(beta, 1.0, 0.0), g);
    for (double v : f.values) worst = std::max(worst, v / c);
  }
  const double ks1 = run("mc-compare", "mc_ou_exact.conf", "c10a").at("summary").at("ks").get<double>();
  const double c2 = 2.0 * ou_bound(0.05, 2.0, 0.0, 1.0);
  const double ks2 = run("mc-compare", "mc_ou_exact.conf", "c10b", [c2](ExperimentConfig& c) {
                       c.bound_kind = "user";
                       c.bound_value = c2;
                     }).at("summary").at("ks").get<double>();
  return {worst <= 1.01 && std::abs(ks1 - ks2) <= 0.01,
          "max V/C=" + num(worst) + " KS(c)=" + num(ks1) + " KS(2c)=" + num(ks2)};
}

// 11. bridge moments
Outcome bridge() {
  const std::vector<double> t{0.2, 0.5, 1.0};
  const std::vector<Vec2> path{{0.3, 0.0}, {9.0, 0.0}, {-0.4, 0.0}};
  const RatioEvaluator eval = [](double tt, const Vec2&) { return tt == 0.5 ? 0.0 : 1.0; };
  const ProposalSpec spec;
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  bool untouched = true;
  for (int s = 0; s < n; ++s) {
    auto p = rejection_pass(t, path, 1, eval, user_bound(1.0), s);
    bridge_infill(p, spec);
    untouched = untouched && std::memcmp(&p.output[0][0], &path[0][0], sizeof(double)) == 0 &&
                std::memcmp(&p.output[2][0], &path[2][0], sizeof(double)) == 0;
    sum += p.output[1][0];
    sq += p.output[1][0] * p.output[1][0];
  }
  const double mean = sum / n, sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  const double expect = 0.3 + (0.5 - 0.2) / (1.0 - 0.2) * (-0.4 - 0.3);
  const double se = sd / std::sqrt(double(n));
  return {std::abs(mean - expect) <= 3.0 * se && untouched,
          "mean=" + num(mean) + " expected=" + num(expect) + " 3SE=" + num(3.0 * se) +
              " accepted untouched=" + (untouched ? "yes" : "no")};
}

int shell(const std::string& args) {
  const std::string cmd = kCli.string() + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

// 12. reruns from manifests
Outcome reproducibility() {
  struct Case {
    std::string command, args;
  };
  const std::vector<Case> cases = {
      {"solve-ratio", "--config " + (kConfigs / "ou_validate.conf").string() + " --normalized"},
      {"solve-ratio", "--config " + (kConfigs / "wf2d_h1.conf").string()},
      {"sample", "--config " + (kConfigs / "wf1d.conf").string()},
      {"validate-ou", "--config " + (kConfigs / "ou_validate.conf").string()},
      {"convergence", "--problem cn1d-mms"},
      {"mc-compare", "--config " + (kConfigs / "mc_ou_exact.conf").string()},
  };
  int files = 0, mismatched = 0, failed = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const fs::path a = fresh("c12/" + std::to_string(i) + "a");
    const fs::path b = fresh("c12/" + std::to_string(i) + "b");
    if (shell(cases[i].command + " " + cases[i].args + " --out " + a.string()) != 0 ||
        shell(cases[i].command + " --from-manifest " + (a / "manifest.json").string() +
              " --out " + b.string()) != 0) {
      ++failed;
      continue;
    }
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      const auto ext = e.path().extension();
      if (ext != ".csv" && ext != ".bin") continue;
      ++files;
      if (slurp(e.path()) != slurp(b / fs::relative(e.path(), a))) ++mismatched;
    }
  }
  return {failed == 0 && mismatched == 0 && files > 0,
          std::to_string(cases.size()) + " commands, " + std::to_string(files) +
              " files compared, " + std::to_string(mismatched) + " differ, " +
              std::to_string(failed) + " runs failed"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> all = {
      {1, "identity degeneracy", identity},
      {2, "O-U exact-ratio agreement", exact_agreement},
      {3, "scheme verification", scheme_orders},
      {4, "large-beta rejection", large_beta},
      {5, "small-beta acceptance", tiny_beta},
      {6, "KS with analytic ratio", [] { return ks_criterion("mc_ou_exact.conf", "c6", 0.015); }},
      {7, "KS with PDE ratio", [] { return ks_criterion("mc_ou_pde.conf", "c7", 0.03); }},
      {8, "Wright-Fisher 1D vs Euler-Maruyama", wright_fisher},
      {9, "2D qualitative trends", wf2d_trends},
      {10, "bound discipline", bound_discipline},
      {11, "bridge correctness", bridge},
      {12, "reproducibility", reproducibility},
  };
  int failures = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d %-36s %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
