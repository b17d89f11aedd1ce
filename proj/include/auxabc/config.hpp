#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "auxabc/distance.hpp"
#include "auxabc/eval.hpp"
#include "auxabc/model.hpp"
#include "auxabc/smc.hpp"

namespace auxabc {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; `path` is the JSON pointer of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ModelBlock {
  // kinetic parameters of the data-generating model; noise stds come from `noise`
  std::map<std::string, double> true_parameters{{"r_g", 0.057}, {"k_s", 3.4}, {"k_c", 2.6}, {"r_d", 0.005}};
  double noise = 0.1;
  std::size_t batches = 3;  // m, for generate and infer
  ErythroblastModel::Setup setup;

  ParameterVector truth() const { return truth(noise); }
  ParameterVector truth(double v) const;
};

struct EngineBlock {
  std::size_t particles = 400;
  double alpha = 0.5;
  std::size_t replications = 60;
  double min_acceptance = 0.15;
  std::size_t max_generations = 100;
  std::size_t max_perturb_retries = 1000;
  DistanceKind distance = DistanceKind::auxiliary;
  Standardization standardization = Standardization::information;
  std::string naive = "mean-curve";  // only definition implemented
};

struct ExperimentBlock {
  std::vector<double> noise{0.1, 0.2};
  std::vector<std::size_t> batches{3, 6, 20};
  std::size_t macro_replications = 30;
  std::size_t predictive_samples = 2000;
  int target_t = 11;
  PredictiveWeighting weighting = PredictiveWeighting::weighted;
};

struct ExperimentConfig {
  ModelBlock model;
  std::map<std::string, UniformBound> prior{{"r_g", {0.0, 0.5}},   {"k_s", {0.0, 5.0}},
                                            {"k_c", {0.0, 5.0}},   {"r_d", {0.0, 0.05}},
                                            {"v_rho", {0.0, 0.2}}, {"v_I", {0.0, 0.2}}};
  EngineBlock engine;
  ExperimentBlock experiment;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string input;  // dataset read by infer; empty means <output_dir>/dataset.csv
  std::size_t workers = 0;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;

  Prior make_prior() const;
  SmcConfig smc() const;
  MacroReplicationConfig cell(double noise, std::size_t batches) const;
};

/// Known presets: "paper", "desk".
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Overlays the fields present in `j` onto `base`. Unknown keys are errors.
ExperimentConfig apply_json(ExperimentConfig base, const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace auxabc
