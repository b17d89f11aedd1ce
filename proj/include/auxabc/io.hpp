#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "auxabc/eval.hpp"
#include "auxabc/lgdbn.hpp"
#include "auxabc/model.hpp"
#include "auxabc/smc.hpp"

namespace auxabc {

// Every file written here is comma-separated text that starts with
//   # auxabc <version>
//   # config: <compact JSON of the effective configuration>
// followed by optional "# key: value" lines and one column-header row.

/// Shortest text that round-trips the double exactly (%.17g).
std::string format_double(double x);

/// Comment lines skipped, header row split, body rows split on commas.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Observed columns only. Extra header line: "# dataset: horizon=H dt=.. state_dims=d action_dims=k".
void write_dataset(const std::filesystem::path& path, const Dataset& data, const nlohmann::json& config);
Dataset read_dataset(const std::filesystem::path& path);

/// One row per retained particle: parameter columns, weight, distance.
void write_posterior(const std::filesystem::path& path, const PosteriorApproximation& posterior,
                     const nlohmann::json& config);
/// One row per tolerance h_1..h_G.
void write_history(const std::filesystem::path& path, const PosteriorApproximation& posterior,
                   const nlohmann::json& config);

struct CellResult {
  double noise = 0.0;
  std::size_t batches = 0;
  bool ok = false;
  std::string error;
  MacroReplicationReport report;
};

/// Two rows per successful replication (auxiliary, naive).
void write_replications(const std::filesystem::path& path, const std::vector<CellResult>& cells,
                        const nlohmann::json& config);
/// Mean wall-time ratio per cell with its 95% interval.
void write_ratio_table(const std::filesystem::path& path, const std::vector<CellResult>& cells,
                       const nlohmann::json& config);
/// Mean K-S per cell and method with 95% intervals.
void write_ks_table(const std::filesystem::path& path, const std::vector<CellResult>& cells,
                    const nlohmann::json& config);
/// Predictive draws of every replication in one cell: true model, auxiliary, naive.
void write_predictive(const std::filesystem::path& path, const CellResult& cell, int target_t,
                      const nlohmann::json& config);

nlohmann::json fit_to_json(const AuxiliaryFit& fit);

}  // namespace auxabc
