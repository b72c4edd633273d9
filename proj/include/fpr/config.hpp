#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpr/errors.hpp"

namespace fpr {

/// Configuration failure tied to a key ("section.name"), reported with exit status 2.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(ErrorKind::Config, what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Flat `key = value` text with `[section]` headers; `#` starts a comment.
/// Returns "section.key" -> raw value. Duplicate keys and keys outside a
/// section are rejected.
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct ExperimentConfig {
  // [params]
  std::string process;  // ou | wf1d | wf2d | custom-1d
  double beta = 0.05;
  double sigma = 1.0;
  double x0 = 0.0;
  double x0_2 = 0.5;
  double gamma = 1.0;
  double h = 1.0;
  double rho = 0.0;
  std::string convention = "ito";  // ito | printed
  std::string ratio_mode = "pde";  // exact | pde (ou)
  bool identity = false;           // wf1d: target forced equal to the proposal
  std::string target = "ou";       // custom-1d
  std::string proposal = "brownian";

  // [time]
  double t_end = 1.0;
  int n_times = 50;
  bool include_start = false;
  std::vector<int> snapshots;  // wf2d levels to emit; empty = all
  std::optional<double> compare_time;

  // [grid]
  int M = 300;
  int N = 200;
  int M2 = 40;  // wf2d mesh intervals per axis
  int N2 = 40;
  bool pad = true;
  std::string domain = "path";  // path | fixed
  std::optional<double> beta_cap;
  std::string order = "compact4";  // compact4 | second
  std::optional<double> x_min, x_max;

  // [bound]
  std::string bound_kind;  // analytic | empirical | user; default depends on process
  double bound_x_max = 2.0;
  double bound_value = 1.0;
  double bound_safety = 1.05;

  // [run]
  std::uint64_t seed = 1;
  int n_paths = 10;
  int jobs = 1;
  int retries = 50;
  std::string mode;  // mc-compare: ou-exact | ou-pde | wf1d
  int pool_size = 0; // 0 = mode default
  double em_dt = 1e-4;
  int em_paths = 100000;
  std::string em_policy = "absorb";  // absorb | clip | none
  std::optional<double> ks_threshold;
  bool binary = false;

  // [sweep]
  std::vector<double> betas;

  std::vector<double> path_times() const;
  /// Window half-width in logit coordinates for the WF processes.
  double window_cap() const;
  /// Re-checks every constraint; throws ConfigError naming the key.
  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// Parses and validates; a missing params.process is reported by name.
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace fpr
