#include "fpr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

namespace fpr {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(d)) {
    throw ConfigError(key, "'" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw ConfigError(key, "'" + key + "' expects an integer, got '" + v + "'");
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> ok) {
  for (const char* o : ok) {
    if (v == o) return;
  }
  std::string list;
  for (const char* o : ok) list += std::string(list.empty() ? "" : ", ") + o;
  throw ConfigError(key, "'" + key + "' must be one of {" + list + "}, got '" + v + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, "'" + key + "' " + what);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (section.empty()) {
      throw ConfigError(key, "line " + std::to_string(lineno) + ": key '" + key +
                                 "' appears before any [section]");
    }
    const std::string full = section + "." + key;
    if (!out.emplace(full, trim(line.substr(eq + 1))).second) {
      throw ConfigError(full, "duplicate key '" + full + "'");
    }
  }
  return out;
}

std::vector<double> ExperimentConfig::path_times() const {
  std::vector<double> t;
  if (include_start) t.push_back(0.0);
  for (int i = 1; i <= n_times; ++i) t.push_back(t_end * i / n_times);
  return t;
}

double ExperimentConfig::window_cap() const {
  if (beta_cap) return *beta_cap;
  return std::numbers::pi / 2 - (process == "wf2d" ? 0.05 : 0.02);
}

void ExperimentConfig::validate() const {
  one_of("params.process", process, {"ou", "wf1d", "wf2d", "custom-1d"});
  require(sigma > 0.0, "params.sigma", "must be positive");
  require(beta >= 0.0, "params.beta", "must be >= 0");
  require(std::abs(rho) < 1.0, "params.rho", "must satisfy |rho| < 1");
  one_of("params.convention", convention, {"ito", "printed"});
  one_of("params.ratio_mode", ratio_mode, {"exact", "pde"});
  one_of("params.target", target, {"ou", "brownian", "logistic-brownian", "wf1d-transformed"});
  one_of("params.proposal", proposal, {"brownian", "logistic-brownian"});
  if (process == "wf1d" || process == "wf2d") {
    require(x0 > 0.0 && x0 < 1.0, "params.x0", "must lie in (0, 1) for Wright-Fisher");
  }
  if (process == "wf2d") require(x0_2 > 0.0 && x0_2 < 1.0, "params.x0_2", "must lie in (0, 1)");
  if (process == "custom-1d" && proposal == "logistic-brownian") {
    require(x0 > 0.0 && x0 < 1.0, "params.x0", "must lie in (0, 1) for a logistic proposal");
  }
  require(t_end > 0.0, "time.t_end", "must be positive");
  require(n_times >= 1, "time.n_times", "must be >= 1");
  for (int s : snapshots) require(s >= 0, "time.snapshots", "entries must be >= 0");
  if (compare_time) {
    require(*compare_time > 0.0 && *compare_time <= t_end, "time.compare_time",
            "must lie in (0, t_end]");
  }
  require(M >= 4, "grid.M", "must be >= 4");
  require(N >= 1, "grid.N", "must be >= 1");
  require(M2 >= 4, "grid.M2", "must be >= 4");
  require(N2 >= 1, "grid.N2", "must be >= 1");
  one_of("grid.domain", domain, {"path", "fixed"});
  one_of("grid.order", order, {"compact4", "second"});
  if (beta_cap) {
    require(*beta_cap > 0.0 && *beta_cap < std::numbers::pi / 2, "grid.beta_cap",
            "must lie in (0, pi/2)");
  }
  if (x_min || x_max) {
    require(x_min && x_max && *x_max > *x_min, "grid.x_max", "needs grid.x_min < grid.x_max");
  }
  if (!bound_kind.empty()) one_of("bound.kind", bound_kind, {"analytic", "empirical", "user"});
  if (bound_kind == "analytic") {
    require(process == "ou", "bound.kind", "analytic bound exists only for process ou");
  }
  require(bound_value > 0.0, "bound.value", "must be positive");
  require(bound_safety >= 1.0, "bound.safety", "must be >= 1");
  require(n_paths >= 1, "run.n_paths", "must be >= 1");
  require(jobs >= 1, "run.jobs", "must be >= 1");
  require(retries >= 1, "run.retries", "must be >= 1");
  if (!mode.empty()) one_of("run.mode", mode, {"ou-exact", "ou-pde", "wf1d"});
  require(pool_size >= 0, "run.pool_size", "must be >= 0");
  require(em_dt > 0.0, "run.em_dt", "must be positive");
  require(em_paths >= 10, "run.em_paths", "must be >= 10");
  one_of("run.em_policy", em_policy, {"absorb", "clip", "none"});
  if (ks_threshold) require(*ks_threshold > 0.0, "run.ks_threshold", "must be positive");
  for (double b : betas) require(b >= 0.0, "sweep.betas", "entries must be >= 0");
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  const auto kv = parse_config_text(text);
  ExperimentConfig c;
  if (!kv.count("params.process")) {
    throw ConfigError("params.process", "missing required key 'params.process'");
  }
  using Setter = std::function<void(const std::string& key, const std::string& v)>;
  auto dbl = [](double& f) -> Setter { return [&f](auto& k, auto& v) { f = to_double(k, v); }; };
  auto opt = [](std::optional<double>& f) -> Setter {
    return [&f](auto& k, auto& v) { f = to_double(k, v); };
  };
  auto integer = [](int& f) -> Setter {
    return [&f](auto& k, auto& v) {
      const long long x = to_int(k, v);
      if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(k, "'" + k + "' out of range");
      f = static_cast<int>(x);
    };
  };
  auto str = [](std::string& f) -> Setter { return [&f](auto&, auto& v) { f = v; }; };
  auto boolean = [](bool& f) -> Setter { return [&f](auto& k, auto& v) { f = to_bool(k, v); }; };

  const std::map<std::string, Setter> setters = {
      {"params.process", str(c.process)},
      {"params.beta", dbl(c.beta)},
      {"params.sigma", dbl(c.sigma)},
      {"params.x0", dbl(c.x0)},
      {"params.x0_2", dbl(c.x0_2)},
      {"params.gamma", dbl(c.gamma)},
      {"params.h", dbl(c.h)},
      {"params.rho", dbl(c.rho)},
      {"params.convention", str(c.convention)},
      {"params.ratio_mode", str(c.ratio_mode)},
      {"params.identity", boolean(c.identity)},
      {"params.target", str(c.target)},
      {"params.proposal", str(c.proposal)},
      {"time.t_end", dbl(c.t_end)},
      {"time.n_times", integer(c.n_times)},
      {"time.include_start", boolean(c.include_start)},
      {"time.snapshots",
       [&c](auto& k, auto& v) {
         c.snapshots.clear();
         for (const auto& s : split_list(v)) c.snapshots.push_back(static_cast<int>(to_int(k, s)));
       }},
      {"time.compare_time", opt(c.compare_time)},
      {"grid.M", integer(c.M)},
      {"grid.N", integer(c.N)},
      {"grid.M2", integer(c.M2)},
      {"grid.N2", integer(c.N2)},
      {"grid.pad", boolean(c.pad)},
      {"grid.domain", str(c.domain)},
      {"grid.beta_cap", opt(c.beta_cap)},
      {"grid.order", str(c.order)},
      {"grid.x_min", opt(c.x_min)},
      {"grid.x_max", opt(c.x_max)},
      {"bound.kind", str(c.bound_kind)},
      {"bound.x_max", dbl(c.bound_x_max)},
      {"bound.value", dbl(c.bound_value)},
      {"bound.safety", dbl(c.bound_safety)},
      {"run.seed",
       [&c](auto& k, auto& v) {
         const long long s = to_int(k, v);
         if (s < 0) throw ConfigError(k, "'run.seed' must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.n_paths", integer(c.n_paths)},
      {"run.jobs", integer(c.jobs)},
      {"run.retries", integer(c.retries)},
      {"run.mode", str(c.mode)},
      {"run.pool_size", integer(c.pool_size)},
      {"run.em_dt", dbl(c.em_dt)},
      {"run.em_paths", integer(c.em_paths)},
      {"run.em_policy", str(c.em_policy)},
      {"run.ks_threshold", opt(c.ks_threshold)},
      {"run.binary", boolean(c.binary)},
      {"sweep.betas",
       [&c](auto& k, auto& v) {
         c.betas.clear();
         for (const auto& s : split_list(v)) c.betas.push_back(to_double(k, s));
         if (c.betas.empty()) throw ConfigError(k, "'sweep.betas' must list at least one value");
       }},
  };
  for (const auto& [key, value] : kv) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

nlohmann::json ExperimentConfig::to_json() const {
  using nlohmann::json;
  auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{
      {"params",
       {{"process", process}, {"beta", beta}, {"sigma", sigma}, {"x0", x0}, {"x0_2", x0_2},
        {"gamma", gamma}, {"h", h}, {"rho", rho}, {"convention", convention},
        {"ratio_mode", ratio_mode}, {"identity", identity}, {"target", target},
        {"proposal", proposal}}},
      {"time",
       {{"t_end", t_end}, {"n_times", n_times}, {"include_start", include_start},
        {"snapshots", snapshots}, {"compare_time", optional(compare_time)}}},
      {"grid",
       {{"M", M}, {"N", N}, {"M2", M2}, {"N2", N2}, {"pad", pad}, {"domain", domain},
        {"beta_cap", optional(beta_cap)}, {"order", order}, {"x_min", optional(x_min)},
        {"x_max", optional(x_max)}}},
      {"bound",
       {{"kind", bound_kind}, {"x_max", bound_x_max}, {"value", bound_value},
        {"safety", bound_safety}}},
      {"run",
       {{"seed", seed}, {"n_paths", n_paths}, {"jobs", jobs}, {"retries", retries},
        {"mode", mode}, {"pool_size", pool_size}, {"em_dt", em_dt}, {"em_paths", em_paths},
        {"em_policy", em_policy}, {"ks_threshold", optional(ks_threshold)}, {"binary", binary}}},
      {"sweep", {{"betas", betas}}},
  };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    auto optional = [](const nlohmann::json& v) -> std::optional<double> {
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    const auto& p = j.at("params");
    c.process = p.at("process").get<std::string>();
    c.beta = p.at("beta");
    c.sigma = p.at("sigma");
    c.x0 = p.at("x0");
    c.x0_2 = p.at("x0_2");
    c.gamma = p.at("gamma");
    c.h = p.at("h");
    c.rho = p.at("rho");
    c.convention = p.at("convention");
    c.ratio_mode = p.at("ratio_mode");
    c.identity = p.at("identity");
    c.target = p.at("target");
    c.proposal = p.at("proposal");
    const auto& t = j.at("time");
    c.t_end = t.at("t_end");
    c.n_times = t.at("n_times");
    c.include_start = t.at("include_start");
    c.snapshots = t.at("snapshots").get<std::vector<int>>();
    c.compare_time = optional(t.at("compare_time"));
    const auto& g = j.at("grid");
    c.M = g.at("M");
    c.N = g.at("N");
    c.M2 = g.at("M2");
    c.N2 = g.at("N2");
    c.pad = g.at("pad");
    c.domain = g.at("domain");
    c.beta_cap = optional(g.at("beta_cap"));
    c.order = g.at("order");
    c.x_min = optional(g.at("x_min"));
    c.x_max = optional(g.at("x_max"));
    const auto& b = j.at("bound");
    c.bound_kind = b.at("kind");
    c.bound_x_max = b.at("x_max");
    c.bound_value = b.at("value");
    c.bound_safety = b.at("safety");
    const auto& r = j.at("run");
    c.seed = r.at("seed");
    c.n_paths = r.at("n_paths");
    c.jobs = r.at("jobs");
    c.retries = r.at("retries");
    c.mode = r.at("mode");
    c.pool_size = r.at("pool_size");
    c.em_dt = r.at("em_dt");
    c.em_paths = r.at("em_paths");
    c.em_policy = r.at("em_policy");
    c.ks_threshold = optional(r.at("ks_threshold"));
    c.binary = r.at("binary");
    c.betas = j.at("sweep").at("betas").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("", std::string("malformed config JSON: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace fpr
