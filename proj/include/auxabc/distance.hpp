#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "auxabc/lgdbn.hpp"
#include "auxabc/model.hpp"

namespace auxabc {

enum class DistanceKind { auxiliary, naive };

std::string_view to_string(DistanceKind kind);
DistanceKind parse_distance_kind(std::string_view text);

struct DistanceSpec {
  DistanceKind kind = DistanceKind::auxiliary;
  /// Per-component divisors for the auxiliary distance; strictly positive.
  std::optional<Eigen::VectorXd> scales;
};

/// Weighted Euclidean distance between two summary vectors.
double auxiliary_distance(const SummaryStatistics& observed, const SummaryStatistics& simulated,
                          const DistanceSpec& spec);

/// How the auxiliary distance scales each summary component.
enum class Standardization {
  none,
  magnitude,    // |eta_obs|, floored
  information,  // asymptotic standard error of each MLE component at the observed fit, floored
};

std::string_view to_string(Standardization s);
Standardization parse_standardization(std::string_view text);

/// |eta| component-wise, floored.
Eigen::VectorXd standardization_scales(const SummaryStatistics& observed, double floor = 1e-6);

/// Standard errors of the auxiliary MLE on `observed`, in summary layout:
/// v/sqrt(m) for means, v/sqrt(2m) for stds, and the least-squares standard
/// errors sqrt(s^2 [(X^T X)^+]_jj) for the transition coefficients. Floored.
Eigen::VectorXd information_scales(const Dataset& observed, double floor = 1e-6);

/// Per-time mean of the observed columns, flattened time-major.
Eigen::VectorXd mean_curve(const Dataset& data);

/// Euclidean distance between the mean observable trajectories ("mean-curve"
/// baseline).
double naive_distance(const Dataset& observed, const Dataset& simulated);

/// Distance to a fixed observed dataset, as consumed by the ABC engine.
class Discrepancy {
 public:
  virtual ~Discrepancy() = default;
  virtual double operator()(const Dataset& simulated) const = 0;
  virtual std::string name() const = 0;
};

class AuxiliaryDiscrepancy final : public Discrepancy {
 public:
  explicit AuxiliaryDiscrepancy(const Dataset& observed,
                                Standardization standardization = Standardization::information);
  double operator()(const Dataset& simulated) const override;
  std::string name() const override { return "auxiliary"; }
  const SummaryStatistics& observed_summary() const { return observed_; }
  const DistanceSpec& spec() const { return spec_; }

 private:
  SummaryStatistics observed_;
  DistanceSpec spec_;
};

class NaiveDiscrepancy final : public Discrepancy {
 public:
  explicit NaiveDiscrepancy(const Dataset& observed);
  double operator()(const Dataset& simulated) const override;
  std::string name() const override { return "naive"; }

 private:
  Eigen::Index horizon_, state_dims_;
  Eigen::VectorXd observed_curve_;
};

std::unique_ptr<Discrepancy> make_discrepancy(DistanceKind kind, const Dataset& observed,
                                              Standardization standardization = Standardization::information);

}  // namespace auxabc
