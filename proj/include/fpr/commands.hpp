#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "fpr/config.hpp"
#include "fpr/sampler.hpp"

namespace fpr {

struct CommandOptions {
  std::filesystem::path out = ".";
  bool normalized = false;
  std::optional<int> jobs;  // overrides run.jobs
  std::string problem;      // convergence only
};

/// Each command writes its artifacts plus `manifest.json` into options.out and
/// returns the manifest. Names: solve-ratio, sample, validate-ou, convergence,
/// mc-compare.
nlohmann::json run_command(const std::string& command, const ExperimentConfig& cfg,
                           const CommandOptions& options);
nlohmann::json run_convergence(const CommandOptions& options);

/// Re-executes the command recorded in a manifest into options.out (only
/// `out` and `jobs` are taken from options).
nlohmann::json rerun_from_manifest(const nlohmann::json& manifest, const CommandOptions& options);

// Builders shared with tests.
OuSamplerConfig ou_sampler_config(const ExperimentConfig& cfg);
Wf1dSamplerConfig wf1d_sampler_config(const ExperimentConfig& cfg);
Wf2dSamplerConfig wf2d_sampler_config(const ExperimentConfig& cfg);
Generic1dSamplerConfig generic_sampler_config(const ExperimentConfig& cfg);
std::unique_ptr<PathSampler> make_sampler(const ExperimentConfig& cfg);

}  // namespace fpr
