#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsec {

/// Configuration error: maps to CLI exit code 1. Any other exception out of
/// an experiment is a numerical failure (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat experiment configuration. Every field mirrors a `key=value` line of
/// the config file; CLI flags override file values.
struct ExperimentConfig {
  std::string case_path;
  double rho = 0.1;
  double snr_db = 10.0;
  double tau = 2.0;
  std::vector<double> lambda_grid;
  std::vector<int> k_grid;
  int mc_trials = 100000;
  int ergodic_trials = 1000;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::optional<double> d0;
  std::optional<double> l0_prime;
  std::string partition_spec;  // e.g. "0-3@1.0;4-7@2.0" (0-based sensor ranges)
};

/// Parse `key=value` lines ('#' comments, blank lines ignored) into a config.
ExperimentConfig parse_config_file(const std::string& path);

/// Apply a single key=value override (the CLI flag path).
void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

/// FNV-1a hash of the canonical serialization; identical configs hash equal.
std::string config_hash(const ExperimentConfig& config);

// Each command returns the complete CSV content (header comment with config
// hash and seed, column header, then rows; all numbers rendered with 17
// significant digits so identical configs produce byte-identical files).
std::string stealth_sweep_csv(const ExperimentConfig& config);
std::string pd_bound_csv(const ExperimentConfig& config);
std::string detattack_csv(const ExperimentConfig& config);
std::string brd_csv(const ExperimentConfig& config);
std::string ergodic_csv(const ExperimentConfig& config);
std::string jacobian_csv(const ExperimentConfig& config);

/// Dispatch by subcommand name, write `<output_dir>/<subcommand>.csv` and
/// return the written path.
std::string run_subcommand(const std::string& name, const ExperimentConfig& config);

}  // namespace gridsec
