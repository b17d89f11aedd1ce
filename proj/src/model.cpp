#include "auxabc/model.hpp"

#include <algorithm>
#include <cmath>

namespace auxabc {

ParameterVector::ParameterVector(std::vector<std::string> n, Eigen::VectorXd v)
    : names(std::move(n)), values(std::move(v)) {
  if (static_cast<Eigen::Index>(names.size()) != values.size())
    throw std::invalid_argument("ParameterVector: " + std::to_string(names.size()) + " names but " +
                                std::to_string(values.size()) + " values");
}

std::size_t ParameterVector::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

Prior::Prior(std::vector<std::string> names, std::vector<UniformBound> bounds)
    : names_(std::move(names)), bounds_(std::move(bounds)) {
  if (names_.size() != bounds_.size()) throw std::invalid_argument("Prior: names/bounds length mismatch");
  if (names_.empty()) throw std::invalid_argument("Prior: no components");
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    const auto& b = bounds_[i];
    if (!(std::isfinite(b.low) && std::isfinite(b.high) && b.low < b.high))
      throw std::invalid_argument("Prior: component '" + names_[i] + "' needs finite low < high");
  }
}

bool Prior::contains(const ParameterVector& theta) const {
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    double v = theta.values[static_cast<Eigen::Index>(i)];
    if (!(v >= bounds_[i].low && v <= bounds_[i].high)) return false;
  }
  return true;
}

ParameterVector sample_prior(const Prior& prior, RandomStream& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(prior.size()));
  for (std::size_t i = 0; i < prior.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = rng.uniform(prior.bounds()[i].low, prior.bounds()[i].high);
  return {prior.names(), std::move(v)};
}

double prior_density(const Prior& prior, const ParameterVector& theta) {
  if (theta.size() != prior.size())
    throw std::invalid_argument("prior_density: theta has " + std::to_string(theta.size()) +
                                " components, prior has " + std::to_string(prior.size()));
  if (!prior.contains(theta)) return 0.0;
  double density = 1.0;
  for (const auto& b : prior.bounds()) density /= (b.high - b.low);
  return density;
}

Trajectory observe(const Trajectory& full) {
  Trajectory out;
  out.states = full.states.leftCols(full.observed_dims());
  out.actions = full.actions;
  out.dt = full.dt;
  out.latent_dims = 0;
  return out;
}

void Dataset::validate() const {
  if (trajectories.empty()) throw std::invalid_argument("dataset is empty");
  const auto& ref = trajectories.front();
  if (ref.states.rows() < 1) throw std::invalid_argument("dataset: trajectory without states");
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    bool same = t.states.rows() == ref.states.rows() && t.states.cols() == ref.states.cols() &&
                t.actions.cols() == ref.actions.cols() && t.dt == ref.dt &&
                t.latent_dims == ref.latent_dims;
    bool actions_ok = t.actions.cols() == 0 || t.actions.rows() == t.states.rows() - 1;
    if (!same || !actions_ok)
      throw std::invalid_argument("dataset: trajectory " + std::to_string(i) + " has inconsistent shape");
  }
}

ErythroblastParams ErythroblastParams::from(const ParameterVector& theta) {
  return {theta["r_g"], theta["k_s"], theta["k_c"], theta["r_d"], theta["v_rho"], theta["v_I"]};
}

ParameterVector ErythroblastParams::to_vector() const {
  Eigen::VectorXd v(6);
  v << r_g, k_s, k_c, r_d, v_rho, v_I;
  return {ErythroblastModel::names(), std::move(v)};
}

ErythroblastModel::ErythroblastModel(Setup setup) : setup_(setup) {
  if (setup_.horizon < 1) throw std::invalid_argument("ErythroblastModel: horizon must be >= 1");
  if (!(setup_.dt > 0.0)) throw std::invalid_argument("ErythroblastModel: dt must be > 0");
}

std::vector<std::string> ErythroblastModel::names() {
  return {"r_g", "k_s", "k_c", "r_d", "v_rho", "v_I"};
}

ErythroblastParams ErythroblastModel::reference_parameters(double noise) {
  return {0.057, 3.4, 2.6, 0.005, noise, noise};
}

Prior ErythroblastModel::reference_prior() {
  return Prior(names(), {{0.0, 0.5}, {0.0, 5.0}, {0.0, 5.0}, {0.0, 0.05}, {0.0, 0.2}, {0.0, 0.2}});
}

double inhibition_factor(double u) {
  // 1 - 1/(1+e^u) == 1/(1+e^-u)
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

Trajectory ErythroblastModel::simulate(const ParameterVector& theta, RandomStream& rng) const {
  return simulate(ErythroblastParams::from(theta), rng);
}

Trajectory ErythroblastModel::simulate(const ErythroblastParams& p, RandomStream& rng) const {
  const int H = setup_.horizon;
  const double dt = setup_.dt;
  Trajectory traj;
  traj.states.resize(H + 1, 2);
  traj.actions.resize(H, 0);
  traj.dt = dt;
  traj.latent_dims = 1;

  double rho = setup_.rho0;
  double inh = setup_.inhibitor0;
  traj.states(0, 0) = rho;
  traj.states(0, 1) = inh;
  for (int t = 0; t < H; ++t) {
    double growth = p.r_g * rho * inhibition_factor(p.k_s * (p.k_c - inh));
    double rho_next = rho + dt * growth + p.v_rho * rng.normal();
    // the noisy density increment feeds the inhibitor update
    double inh_next = inh + dt * ((rho_next - rho) / dt - p.r_d * inh) + p.v_I * rng.normal();
    if (!std::isfinite(rho_next) || !std::isfinite(inh_next))
      throw SimulationError("non-finite state at step " + std::to_string(t + 1), t + 1);
    rho = rho_next;
    inh = inh_next;
    traj.states(t + 1, 0) = rho;
    traj.states(t + 1, 1) = inh;
  }
  return traj;
}

RandomStream replicate_stream(std::uint64_t key, std::uint64_t index) {
  return RandomStream(key).substream({index});
}

Dataset generate_dataset(const StochasticModel& model, const ParameterVector& theta,
                         std::size_t count, std::size_t replications, std::uint64_t key) {
  if (count < 1 || replications < 1)
    throw std::invalid_argument("generate_dataset: count and replications must be >= 1");
  Dataset out;
  const std::size_t total = count * replications;
  out.trajectories.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    RandomStream rng = replicate_stream(key, i);
    out.trajectories.push_back(observe(model.simulate(theta, rng)));
  }
  return out;
}

}  // namespace auxabc
