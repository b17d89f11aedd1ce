#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "auxabc/config.hpp"

namespace auxabc {

/// Command-line overrides, applied in order: preset, config file, flags.
struct CliOptions {
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  std::optional<DistanceKind> method;
  std::optional<std::string> data;
  bool quiet = false;
};

ExperimentConfig resolve_config(const CliOptions& options);

// Exit codes: 0 success, 1 run failure, 2 invalid configuration.

/// m observed trajectories from the true parameters -> <out>/dataset.csv.
int cmd_generate(const CliOptions& options, std::ostream& out, std::ostream& err);

/// One ABC-SMC run on the input dataset -> <out>/posterior_<method>.csv and
/// <out>/history_<method>.csv. Progress goes to `err` as JSON lines.
int cmd_infer(const CliOptions& options, std::ostream& out, std::ostream& err);

/// The (v, m) grid of macro-replications -> replications.csv, ratio_table.csv,
/// ks_table.csv and predictive_v<v>_m<m>.csv under <out>. Nonzero iff any cell failed.
int cmd_experiment(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Prints the effective configuration as JSON.
int cmd_validate_config(const CliOptions& options, std::ostream& out, std::ostream& err);

/// Prints the auxiliary fit of the input dataset as JSON.
int cmd_fit(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace auxabc
