#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auxabc/model.hpp"

namespace auxabc {

/// Maximum-likelihood fit of the linear-Gaussian dynamic Bayesian network
/// over observed states and actions:
///
///   x_{t+1} = mu_x[t+1] + psi_x[t] (x_t - mu_x[t]) + psi_a[t] (a_t - mu_a[t]) + diag(v_x[t+1]) w
///   a_t     = mu_a[t] + diag(sigma[t]) w'
///
/// Row t of the matrices is time t (0-based here, 1-based in the model).
struct AuxiliaryFit {
  Eigen::Index horizon = 0;
  Eigen::Index state_dims = 0;
  Eigen::Index action_dims = 0;
  Eigen::MatrixXd mu_x;              // (H+1) x d_x
  Eigen::MatrixXd mu_a;              // H x d_a
  std::vector<Eigen::MatrixXd> psi_x;  // H of d_x x d_x
  std::vector<Eigen::MatrixXd> psi_a;  // H of d_x x d_a
  Eigen::MatrixXd sigma;             // H x d_a, action stds
  Eigen::MatrixXd v_x;               // (H+1) x d_x, state stds

  bool operator==(const AuxiliaryFit& other) const;
};

/// Maps positions of the flat summary vector back to named fit components.
///
/// Canonical order: mu_x (time-major), mu_a (time-major), psi_x (time-major,
/// row-major), psi_a (same), sigma (time-major), v_x (time-major).
class SummaryLayout {
 public:
  struct Segment {
    std::string name;
    std::size_t offset;
    std::size_t size;
  };

  SummaryLayout() = default;
  SummaryLayout(Eigen::Index horizon, Eigen::Index state_dims, Eigen::Index action_dims);

  std::size_t size() const { return size_; }
  const std::vector<Segment>& segments() const { return segments_; }
  Eigen::Index horizon() const { return horizon_; }
  Eigen::Index state_dims() const { return state_dims_; }
  Eigen::Index action_dims() const { return action_dims_; }

  /// Human-readable label, e.g. "psi_x[t=3](0,0)" (t is 1-based).
  std::string label(std::size_t position) const;

  bool operator==(const SummaryLayout& other) const {
    return horizon_ == other.horizon_ && state_dims_ == other.state_dims_ &&
           action_dims_ == other.action_dims_;
  }

 private:
  Eigen::Index horizon_ = 0, state_dims_ = 0, action_dims_ = 0;
  std::size_t size_ = 0;
  std::vector<Segment> segments_;
};

struct SummaryStatistics {
  Eigen::VectorXd eta;
  SummaryLayout layout;
};

AuxiliaryFit fit_mle(const Dataset& data);

SummaryStatistics flatten(const AuxiliaryFit& fit);
AuxiliaryFit unflatten(const SummaryStatistics& stats);

/// flatten(fit_mle(data))
SummaryStatistics summarize(const Dataset& data);

struct JointGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Joint normal law of the stacked trajectory (x_1, a_1, ..., x_H, a_H, x_{H+1})
/// implied by a fit: mean mu_tau and covariance (I-B)^-1 Sigma (I-B)^-T.
JointGaussian joint_distribution(const AuxiliaryFit& fit);

/// The coefficient matrix B in stacked-trajectory order.
Eigen::MatrixXd coefficient_matrix(const AuxiliaryFit& fit);

/// Draws trajectories by running the transition recursion forward.
Dataset sample_auxiliary(const AuxiliaryFit& fit, std::size_t count, std::uint64_t key);

}  // namespace auxabc
