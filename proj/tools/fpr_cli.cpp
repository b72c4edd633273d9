#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpr/commands.hpp"
#include "fpr/config.hpp"

namespace {

struct Args {
  std::string config;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out = ".";
  bool normalized = false;
  std::string problem;
};

int report(const std::string& kind, const std::string& key, const std::string& message, int code) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  if (!key.empty()) j["key"] = key;
  std::cerr << j.dump() << '\n';
  return code;
}

bool is_usage_error(fpr::ErrorKind k) {
  using fpr::ErrorKind;
  return k == ErrorKind::Config || k == ErrorKind::InvalidParameter ||
         k == ErrorKind::InvalidTime || k == ErrorKind::UnknownProcess ||
         k == ErrorKind::InvalidInput;
}

nlohmann::json read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fpr::ConfigError("", "cannot open manifest " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fpr::ConfigError("", std::string("manifest is not valid JSON: ") + e.what());
  }
}

int run(const std::string& command, const Args& a) {
  fpr::CommandOptions o;
  o.out = a.out;
  o.jobs = a.jobs;
  o.normalized = a.normalized;
  o.problem = a.problem;
  nlohmann::json m;
  if (!a.manifest.empty()) {
    const auto recorded = read_manifest(a.manifest);
    if (recorded.value("command", "") != command) {
      throw fpr::ConfigError("command", "manifest records command '" +
                                            recorded.value("command", "") + "', not " + command);
    }
    m = fpr::rerun_from_manifest(recorded, o);
  } else if (command == "convergence") {
    if (o.problem.empty()) throw fpr::ConfigError("problem", "--problem is required");
    m = fpr::run_convergence(o);
  } else {
    if (a.config.empty()) throw fpr::ConfigError("config", "--config or --from-manifest is required");
    auto cfg = fpr::ExperimentConfig::load(a.config);
    if (a.seed) cfg.seed = *a.seed;
    m = fpr::run_command(command, cfg, o);
  }
  std::cout << (std::filesystem::path(a.out) / "manifest.json").string() << '\n';
  if (m.contains("summary") && m["summary"].is_object() && m["summary"].contains("pass") &&
      !m["summary"]["pass"].get<bool>()) {
    std::cerr << "KS statistic above threshold\n";
  }
  if (m.contains("summary") && m["summary"].is_object() &&
      m["summary"].value("failed_paths", 0) > 0) {
    std::cerr << m["summary"]["failed_paths"].get<int>()
              << " path(s) were rejected at every point on every retry\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ratio-PDE path sampler"};
  app.require_subcommand(1);
  Args a;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (name == "convergence") {
      sub->add_option("--problem", a.problem, "cn1d-mms | adi2d-heat | adi2d-mms");
    } else {
      sub->add_option("--config", a.config, "experiment config file");
      sub->add_option("--seed", a.seed, "override run.seed");
      sub->add_option("--jobs", a.jobs, "worker threads")->check(CLI::PositiveNumber);
    }
    sub->add_option("--from-manifest", a.manifest, "re-run the command recorded in a manifest");
    sub->add_option("--out", a.out, "output directory");
    if (name == "solve-ratio") sub->add_flag("--normalized", a.normalized, "also write V / max V");
    sub->callback([&chosen, name] { chosen = name; });
  };
  add("solve-ratio", "solve the ratio PDE and write the field");
  add("sample", "draw weighted paths");
  add("validate-ou", "compare the PDE ratio with the exact O-U ratio");
  add("convergence", "run a convergence study");
  add("mc-compare", "compare accepted samples against an oracle distribution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("usage", "", e.what(), 2);
  }

  try {
    return run(chosen, a);
  } catch (const fpr::ConfigError& e) {
    return report("config", e.key(), e.what(), 2);
  } catch (const fpr::Error& e) {
    return report(std::string(fpr::to_string(e.kind())), "", e.what(),
                  is_usage_error(e.kind()) ? 2 : 1);
  } catch (const std::exception& e) {
    return report("internal", "", e.what(), 1);
  }
}
