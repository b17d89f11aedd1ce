#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auxabc/distance.hpp"
#include "auxabc/model.hpp"
#include "auxabc/smc.hpp"

namespace auxabc {

/// K draws of the full state (rho, I) at one time index.
struct PredictiveSample {
  Eigen::MatrixXd values;  // K x state dims
  std::string source;

  std::vector<double> column(Eigen::Index c) const;
};

enum class PredictiveWeighting { weighted, uniform };

/// Each draw picks a retained particle (by weight, or uniformly), simulates
/// one full trajectory from the model's initial state and records the state
/// at 1-based time `target_t`. Draw k uses replicate_stream(key, k).
PredictiveSample sample_posterior_predictive(const PosteriorApproximation& posterior, const StochasticModel& model,
                                             int target_t, std::size_t draws, std::uint64_t key,
                                             PredictiveWeighting weighting = PredictiveWeighting::weighted,
                                             std::string source = "posterior");

/// Predictive sample of the model at a fixed parameter.
PredictiveSample sample_reference_predictive(const StochasticModel& model, const ParameterVector& theta, int target_t,
                                             std::size_t draws, std::uint64_t key);

/// Two-sample Kolmogorov-Smirnov statistic sup_s |F_a(s) - F_b(s)|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// mean +- 1.96 S / sqrt(R), S with R-1 denominator.
struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

ConfidenceInterval confidence_interval(std::span<const double> values);

struct MacroReplicationConfig {
  ErythroblastModel::Setup setup;
  Prior prior = ErythroblastModel::reference_prior();
  SmcConfig engine;  // engine.seed is replaced per replication
  double noise = 0.1;
  ParameterVector truth;  // empty: reference parameters at `noise`
  std::size_t batches = 3;  // m
  std::size_t macro_replications = 10;
  std::size_t predictive_samples = 2000;
  int target_t = 11;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  PredictiveWeighting weighting = PredictiveWeighting::weighted;
  Standardization standardization = Standardization::information;
  // called from worker threads; must be thread-safe
  std::function<void(std::size_t replication, DistanceKind, const GenerationRecord&)> progress;
};

struct MethodOutcome {
  double ks_rho = 0.0;
  double ks_inhibitor = 0.0;
  double runtime_seconds = 0.0;
  PosteriorApproximation posterior;
  PredictiveSample predictive;
};

struct ReplicationRecord {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  MethodOutcome auxiliary;
  MethodOutcome naive;
  double ratio = 0.0;  // naive runtime / auxiliary runtime
  PredictiveSample reference;
};

struct MacroReplicationReport {
  MacroReplicationConfig config;
  std::vector<ReplicationRecord> replications;
  std::size_t failures = 0;
  std::vector<std::string> warnings;
  ConfidenceInterval ks_rho_auxiliary, ks_inhibitor_auxiliary;
  ConfidenceInterval ks_rho_naive, ks_inhibitor_naive;
  ConfidenceInterval ratio;

  std::vector<const ReplicationRecord*> successful() const;
};

/// Runs one macro-replication: fresh observed data from the true parameters
/// with seed + index, then auxiliary and naive ABC-SMC on common random
/// numbers, then K-S statistics at target_t against the true-model
/// predictive sample.
ReplicationRecord run_replication(const MacroReplicationConfig& config, std::size_t index, std::size_t engine_workers);

/// Replications run concurrently; failures are excluded with a warning while
/// they stay under 20% of the runs, otherwise std::runtime_error.
MacroReplicationReport run_macro_replications(const MacroReplicationConfig& config);

}  // namespace auxabc
