#pragma once

// Run configuration: one JSON document governs every tunable constant.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpolicy/agents/training.hpp"
#include "mpolicy/environment.hpp"

namespace mpolicy {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string data_dir;  // empty: $MPOLICY_DATA_DIR, then the bundled sample
  bool intercept = false;
  std::uint64_t seed = 20250101;
  int eval_episodes = 200;
  double eval_gamma = 0.99;
  std::string output_dir = "results";
  std::vector<std::string> methods = default_benchmark_methods();
  RewardParams reward;
  EpisodeConfig episode;
  Hyperparameters hyper = Hyperparameters::defaults();

  void validate() const;
};

/// Applies the keys of `json_text` on top of the defaults. Unknown keys and
/// type mismatches throw ConfigError naming the offending path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration, stable key order, two-space indent.
std::string dump_config(const RunConfig& cfg);

/// Data directory resolution: explicit value, then $MPOLICY_DATA_DIR, then
/// the bundled sample directory.
std::filesystem::path resolve_data_dir(const std::string& configured);

}  // namespace mpolicy
