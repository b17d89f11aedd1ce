#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "auxabc/random.hpp"

namespace auxabc {

/// A point in model-parameter space with labelled components.
struct ParameterVector {
  std::vector<std::string> names;
  Eigen::VectorXd values;

  ParameterVector() = default;
  ParameterVector(std::vector<std::string> n, Eigen::VectorXd v);

  std::size_t size() const { return names.size(); }
  std::size_t index_of(std::string_view name) const;
  double operator[](std::string_view name) const { return values[static_cast<Eigen::Index>(index_of(name))]; }
  void set(std::string_view name, double value) { values[static_cast<Eigen::Index>(index_of(name))] = value; }

  bool operator==(const ParameterVector& other) const {
    return names == other.names && values == other.values;
  }
};

struct UniformBound {
  double low;
  double high;
};

/// Independent uniform prior on a box.
class Prior {
 public:
  Prior(std::vector<std::string> names, std::vector<UniformBound> bounds);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<UniformBound>& bounds() const { return bounds_; }

  bool contains(const ParameterVector& theta) const;

 private:
  std::vector<std::string> names_;
  std::vector<UniformBound> bounds_;
};

ParameterVector sample_prior(const Prior& prior, RandomStream& rng);

/// Product of 1/(high-low) inside the box, exactly 0 outside.
double prior_density(const Prior& prior, const ParameterVector& theta);

/// State/action time series over one horizon.
///
/// `states` is (H+1) x d with the trailing `latent_dims` columns holding the
/// unobserved part of the state; `actions` is H x d_a (d_a may be 0).
struct Trajectory {
  Eigen::MatrixXd states;
  Eigen::MatrixXd actions;
  double dt = 1.0;
  Eigen::Index latent_dims = 0;

  Eigen::Index horizon() const { return states.rows() - 1; }
  Eigen::Index state_dims() const { return states.cols(); }
  Eigen::Index observed_dims() const { return states.cols() - latent_dims; }
  Eigen::Index action_dims() const { return actions.cols(); }

  bool operator==(const Trajectory& other) const {
    return dt == other.dt && latent_dims == other.latent_dims && states == other.states &&
           actions.rows() == other.actions.rows() && actions.cols() == other.actions.cols() &&
           actions == other.actions;
  }
};

/// Projection onto the observable state columns. Idempotent.
Trajectory observe(const Trajectory& full);

/// m trajectories sharing horizon, step and dimensions.
struct Dataset {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  const Trajectory& front() const { return trajectories.front(); }
  Eigen::Index horizon() const { return front().horizon(); }
  Eigen::Index state_dims() const { return front().state_dims(); }
  Eigen::Index action_dims() const { return front().action_dims(); }

  /// Throws std::invalid_argument on an empty or heterogeneous dataset.
  void validate() const;

  bool operator==(const Dataset& other) const { return trajectories == other.trajectories; }
};

/// Thrown when a simulated state stops being finite.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Stochastic simulator contract. Implementations must be pure given the
/// stream so that many workers can call simulate() concurrently.
class StochasticModel {
 public:
  virtual ~StochasticModel() = default;
  virtual std::vector<std::string> parameter_names() const = 0;
  /// Full trajectory, latent columns included.
  virtual Trajectory simulate(const ParameterVector& theta, RandomStream& rng) const = 0;
};

struct ErythroblastParams {
  double r_g;    // growth rate, 1/hour
  double k_s;    // inhibitor sensitivity
  double k_c;    // inhibitor threshold
  double r_d;    // inhibitor decay, 1/hour
  double v_rho;  // transition noise std of cell density
  double v_I;    // transition noise std of inhibitor

  static ErythroblastParams from(const ParameterVector& theta);
  ParameterVector to_vector() const;
};

/// Discretized autocrine-inhibition growth model with additive Gaussian
/// transition noise. Observed column: cell density rho (10^6 cells/mL).
/// Latent column: inhibitor concentration I. States are never clamped;
/// noise may drive them negative.
class ErythroblastModel final : public StochasticModel {
 public:
  struct Setup {
    double rho0 = 3.0;
    double inhibitor0 = 0.0;
    double dt = 3.0;
    int horizon = 10;
  };

  explicit ErythroblastModel(Setup setup);

  static std::vector<std::string> names();
  static ErythroblastParams reference_parameters(double noise);
  static Prior reference_prior();

  std::vector<std::string> parameter_names() const override { return names(); }
  Trajectory simulate(const ParameterVector& theta, RandomStream& rng) const override;
  Trajectory simulate(const ErythroblastParams& p, RandomStream& rng) const;

  const Setup& setup() const { return setup_; }

 private:
  Setup setup_;
};

/// 1 - 1/(1 + exp(u)), evaluated without overflow for large |u|.
double inhibition_factor(double u);

/// Stream of the `index`-th replicate trajectory under `key`.
RandomStream replicate_stream(std::uint64_t key, std::uint64_t index);

/// count * replications observed trajectories; trajectory i uses
/// replicate_stream(key, i), so the result does not depend on evaluation order.
Dataset generate_dataset(const StochasticModel& model, const ParameterVector& theta,
                         std::size_t count, std::size_t replications, std::uint64_t key);

}  // namespace auxabc
