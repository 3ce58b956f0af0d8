#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dmmsim/engine.hpp"

namespace dmmsim {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scenario template plus the experiment-level settings a study needs.
struct ExperimentConfig {
  SimConfig sim;
  /// Trials per cell; a study picks its own default when unset.
  std::optional<int> trials;
  std::vector<int> dmm_counts{1, 2, 3, 4, 5};
  std::vector<int> rebate_bps_list{16, 18, 20, 22, 24, 26};
  std::vector<std::string> assets{"KO"};
  /// Drop DMM quotes from the EP denominator and numerator.
  bool exclude_dmm{false};
  /// Source file of sim.historical_path, kept for the config echo.
  std::string historical_path_file;
};

/// key -> value pairs applied after the file, in order.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Keys that must appear in a config file (or its overrides).
const std::vector<std::string>& required_config_keys();
/// Every accepted key, in canonical echo order.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines; `#` starts a comment. Errors name the source and line.
ExperimentConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {},
                              const std::string& source = "config");
ExperimentConfig load_config(const std::filesystem::path& file, const ConfigOverrides& overrides = {});
/// Defaults with overrides applied; no keys are required.
ExperimentConfig default_config(const ConfigOverrides& overrides = {});

/// Canonical `key = value` listing; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const ExperimentConfig& config);

}  // namespace dmmsim
