#include "auxabc/distance.hpp"

#include <cmath>
#include <stdexcept>

namespace auxabc {

std::string_view to_string(DistanceKind kind) {
  return kind == DistanceKind::auxiliary ? "auxiliary" : "naive";
}

DistanceKind parse_distance_kind(std::string_view text) {
  if (text == "auxiliary") return DistanceKind::auxiliary;
  if (text == "naive") return DistanceKind::naive;
  throw std::invalid_argument("unknown distance kind '" + std::string(text) + "' (expected auxiliary|naive)");
}

double auxiliary_distance(const SummaryStatistics& a, const SummaryStatistics& b, const DistanceSpec& spec) {
  if (!(a.layout == b.layout) || a.eta.size() != b.eta.size())
    throw std::invalid_argument("auxiliary_distance: summary layouts differ");
  if (!spec.scales) return (a.eta - b.eta).norm();
  const auto& s = *spec.scales;
  if (s.size() != a.eta.size()) throw std::invalid_argument("auxiliary_distance: scale vector has wrong length");
  if ((s.array() <= 0.0).any()) throw std::invalid_argument("auxiliary_distance: scales must be > 0");
  return ((a.eta - b.eta).array() / s.array()).matrix().norm();
}

std::string_view to_string(Standardization s) {
  switch (s) {
    case Standardization::none: return "none";
    case Standardization::magnitude: return "magnitude";
    case Standardization::information: return "information";
  }
  return "?";
}

Standardization parse_standardization(std::string_view text) {
  if (text == "none") return Standardization::none;
  if (text == "magnitude") return Standardization::magnitude;
  if (text == "information") return Standardization::information;
  throw std::invalid_argument("unknown standardization '" + std::string(text) +
                              "' (expected none|magnitude|information)");
}

Eigen::VectorXd standardization_scales(const SummaryStatistics& observed, double floor) {
  return observed.eta.array().abs().max(floor).matrix();
}

Eigen::VectorXd information_scales(const Dataset& observed, double floor) {
  const AuxiliaryFit fit = fit_mle(observed);
  const Eigen::Index H = fit.horizon, dx = fit.state_dims, da = fit.action_dims;
  const auto m = static_cast<Eigen::Index>(observed.size());
  const double rm = static_cast<double>(m);

  AuxiliaryFit se = fit;
  se.mu_x = fit.v_x / std::sqrt(rm);
  se.mu_a = fit.sigma / std::sqrt(rm);
  se.v_x = fit.v_x / std::sqrt(2.0 * rm);
  se.sigma = fit.sigma / std::sqrt(2.0 * rm);

  Eigen::MatrixXd design(m, dx + da), response(m, dx);
  for (Eigen::Index t = 0; t < H; ++t) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& tr = observed.trajectories[static_cast<std::size_t>(i)];
      design.row(i).head(dx) = tr.states.row(t) - fit.mu_x.row(t);
      if (da > 0) design.row(i).tail(da) = tr.actions.row(t) - fit.mu_a.row(t);
      response.row(i) = tr.states.row(t + 1) - fit.mu_x.row(t + 1);
    }
    Eigen::MatrixXd coef(dx + da, dx);
    coef.topRows(dx) = fit.psi_x[static_cast<std::size_t>(t)].transpose();
    coef.bottomRows(da) = fit.psi_a[static_cast<std::size_t>(t)].transpose();
    const Eigen::VectorXd resid_var = (response - design * coef).array().square().colwise().sum() / rm;
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd gram_pinv_diag =
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(gram).pseudoInverse().diagonal();
    // row k of psi holds the coefficients of output k
    Eigen::MatrixXd psi_se = (resid_var * gram_pinv_diag.transpose()).array().max(0.0).sqrt();
    se.psi_x[static_cast<std::size_t>(t)] = psi_se.leftCols(dx);
    se.psi_a[static_cast<std::size_t>(t)] = psi_se.rightCols(da);
  }
  return flatten(se).eta.array().max(floor).matrix();
}

Eigen::VectorXd mean_curve(const Dataset& data) {
  data.validate();
  const Eigen::Index rows = data.front().states.rows();
  const Eigen::Index dx = data.front().observed_dims();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, dx);
  for (const auto& tr : data.trajectories) sum += tr.states.leftCols(dx);
  sum /= static_cast<double>(data.size());
  Eigen::VectorXd out(rows * dx);
  for (Eigen::Index t = 0; t < rows; ++t) out.segment(t * dx, dx) = sum.row(t).transpose();
  return out;
}

double naive_distance(const Dataset& observed, const Dataset& simulated) {
  observed.validate();
  simulated.validate();
  if (observed.horizon() != simulated.horizon() ||
      observed.front().observed_dims() != simulated.front().observed_dims())
    throw std::invalid_argument("naive_distance: datasets differ in horizon or state dimension");
  return (mean_curve(observed) - mean_curve(simulated)).norm();
}

AuxiliaryDiscrepancy::AuxiliaryDiscrepancy(const Dataset& observed, Standardization standardization)
    : observed_(summarize(observed)) {
  spec_.kind = DistanceKind::auxiliary;
  if (standardization == Standardization::magnitude) spec_.scales = standardization_scales(observed_);
  if (standardization == Standardization::information) spec_.scales = information_scales(observed);
}

double AuxiliaryDiscrepancy::operator()(const Dataset& simulated) const {
  return auxiliary_distance(observed_, summarize(simulated), spec_);
}

NaiveDiscrepancy::NaiveDiscrepancy(const Dataset& observed)
    : horizon_(observed.horizon()), state_dims_(observed.front().observed_dims()),
      observed_curve_(mean_curve(observed)) {}

double NaiveDiscrepancy::operator()(const Dataset& simulated) const {
  if (simulated.horizon() != horizon_ || simulated.front().observed_dims() != state_dims_)
    throw std::invalid_argument("naive_distance: datasets differ in horizon or state dimension");
  return (observed_curve_ - mean_curve(simulated)).norm();
}

std::unique_ptr<Discrepancy> make_discrepancy(DistanceKind kind, const Dataset& observed,
                                              Standardization standardization) {
  if (kind == DistanceKind::auxiliary) return std::make_unique<AuxiliaryDiscrepancy>(observed, standardization);
  return std::make_unique<NaiveDiscrepancy>(observed);
}

}  // namespace auxabc
