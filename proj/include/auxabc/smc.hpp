#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auxabc/distance.hpp"
#include "auxabc/model.hpp"
#include "auxabc/random.hpp"

namespace auxabc {

struct Particle {
  ParameterVector theta;
  double weight = 1.0;
  double distance = 0.0;
};

struct Population {
  std::vector<Particle> particles;
  double tolerance = 0.0;
  int generation = 0;

  double total_weight() const;
  std::vector<double> weights() const;
  /// Weights divided by their sum.
  std::vector<double> normalized_weights() const;
};

/// Gaussian random-walk kernel N(center, covariance).
class PerturbationKernel {
 public:
  explicit PerturbationKernel(Eigen::MatrixXd covariance);

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  Eigen::Index dims() const { return covariance_.rows(); }

  /// Zero-mean draw; works for singular (PSD) covariances.
  Eigen::VectorXd draw(RandomStream& rng) const;

  /// log N(x | center, covariance); -inf when the covariance is singular.
  double log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& center) const;

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd root_;  // root * root^T == covariance
  bool positive_definite_ = false;
  Eigen::MatrixXd chol_l_;
  double log_norm_ = 0.0;
};

/// Raised by the engine; carries the generation in which it failed.
class EngineError : public std::runtime_error {
 public:
  EngineError(const std::string& what, int generation)
      : std::runtime_error("generation " + std::to_string(generation) + ": " + what), generation_(generation) {}
  int generation() const { return generation_; }

 private:
  int generation_;
};

struct SmcConfig {
  std::size_t particles = 400;       // N
  double alpha = 0.5;                // retained fraction
  std::size_t replications = 60;    // L, simulated copies per observed trajectory
  double min_acceptance = 0.15;      // p_acc_min
  std::size_t max_generations = 100;  // cap on refinement loops
  std::uint64_t seed = 0;
  std::size_t workers = 0;           // 0: hardware concurrency
  std::size_t max_perturb_retries = 1000;

  /// Target retained count floor(alpha * N).
  std::size_t retained_count() const;
  void validate() const;
};

struct GenerationRecord {
  int generation = 0;
  double tolerance = 0.0;
  double acceptance = 1.0;
  std::uint64_t simulator_calls = 0;
  double elapsed_seconds = 0.0;
  std::size_t retained = 0;
  double max_retained_distance = 0.0;
};

struct PosteriorApproximation {
  Population population;                 // weights normalized to sum 1
  std::vector<GenerationRecord> history;  // one record per tolerance h_1..h_G
  std::uint64_t simulator_calls = 0;
  double elapsed_seconds = 0.0;
  bool hit_generation_cap = false;

  std::vector<double> tolerances() const;
  std::vector<double> acceptance_rates() const;
  std::size_t refinement_loops() const { return history.empty() ? 0 : history.size() - 1; }

  /// Weighted mean/std of one parameter component.
  double mean(std::string_view name) const;
  double stddev(std::string_view name) const;
};

using ProgressCallback = std::function<void(const GenerationRecord&)>;

/// Index k drawn with probability weights[k] / sum(weights).
std::size_t resample_index(std::span<const double> weights, RandomStream& rng);

/// theta_star plus a kernel draw, redrawn until it lands in the prior support.
ParameterVector perturb(const ParameterVector& theta_star, const PerturbationKernel& kernel, const Prior& prior,
                        RandomStream& rng, std::size_t max_retries = 1000);

/// prior(theta) * indicator / sum_j normalized_w_j K(theta | theta_j).
double compute_weight(const ParameterVector& theta, const Population& previous, const PerturbationKernel& kernel,
                      const Prior& prior, bool indicator);

/// The `rank`-th smallest value (1-based).
double order_statistic(std::span<const double> values, std::size_t rank);

/// The floor(alpha * N)-th smallest distance (at least the smallest).
double adapt_tolerance(std::span<const double> distances, double alpha);

/// Twice the weighted covariance of the population, plus 1e-10 * trace on
/// the diagonal.
PerturbationKernel adapt_kernel(const Population& population);

/// Adaptive ABC-SMC with alpha-quantile tolerances and acceptance-rate
/// stopping. Each particle simulates observed.size() * replications
/// trajectories. Random streams are addressed by (seed, generation, slot,
/// trajectory), so the output does not depend on the worker count.
PosteriorApproximation run_abc_smc(const Prior& prior, const StochasticModel& model, const Discrepancy& discrepancy,
                                   std::size_t observed_count, const SmcConfig& config,
                                   const ProgressCallback& progress = {});

}  // namespace auxabc
