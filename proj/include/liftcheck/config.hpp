#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "liftcheck/generator.hpp"
#include "liftcheck/lifters.hpp"
#include "liftcheck/metrics.hpp"
#include "liftcheck/toolchain.hpp"

namespace liftcheck {

// Parse or validation failure; the message names a line/column or a field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  GenerationConfig generator;
  ToolchainConfig toolchain;
  std::vector<LifterSpec> lifters;
  MetricsConfig metrics;
  std::vector<OptLevel> opt_levels{OptLevel::O0, OptLevel::O3};
  int workers = 0;  // 0 = available CPUs

  void validate() const;
};

// Sections: generator, toolchain, lifters[], metrics, pipeline. Unknown keys
// are rejected.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// The config as JSON, secrets excluded (auth values are never stored).
nlohmann::json to_json(const RunConfig& config);

// Four builtin lifters over builtin programs.
RunConfig selftest_config(std::size_t program_count = 20);

int default_workers();

}  // namespace liftcheck
