#include "auxabc/smc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "auxabc/parallel.hpp"

namespace auxabc {

double Population::total_weight() const {
  double s = 0.0;
  for (const auto& p : particles) s += p.weight;
  return s;
}

std::vector<double> Population::weights() const {
  std::vector<double> w;
  w.reserve(particles.size());
  for (const auto& p : particles) w.push_back(p.weight);
  return w;
}

std::vector<double> Population::normalized_weights() const {
  auto w = weights();
  const double total = total_weight();
  for (auto& x : w) x /= total;
  return w;
}

PerturbationKernel::PerturbationKernel(Eigen::MatrixXd covariance) : covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols()) throw std::invalid_argument("PerturbationKernel: covariance not square");
  const double scale = std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("PerturbationKernel: covariance not symmetric");
  Eigen::MatrixXd sym = 0.5 * (covariance_ + covariance_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument("PerturbationKernel: covariance not positive semi-definite");
  root_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  positive_definite_ = llt.info() == Eigen::Success && sym.rows() > 0 && eig.eigenvalues().minCoeff() > 0.0;
  if (positive_definite_) {
    chol_l_ = llt.matrixL();
    const double log_det = 2.0 * chol_l_.diagonal().array().log().sum();
    log_norm_ = -0.5 * (static_cast<double>(sym.rows()) * std::log(2.0 * std::numbers::pi) + log_det);
  }
}

Eigen::VectorXd PerturbationKernel::draw(RandomStream& rng) const {
  Eigen::VectorXd z(dims());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return root_ * z;
}

double PerturbationKernel::log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& center) const {
  if (!positive_definite_) return -std::numeric_limits<double>::infinity();
  Eigen::VectorXd r = chol_l_.triangularView<Eigen::Lower>().solve(x - center);
  return log_norm_ - 0.5 * r.squaredNorm();
}

std::size_t SmcConfig::retained_count() const {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(particles)));
}

void SmcConfig::validate() const {
  if (particles < 2) throw std::invalid_argument("engine: particles must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("engine: alpha must lie in (0, 1)");
  const auto kept = retained_count();
  if (kept < 1 || kept >= particles)
    throw std::invalid_argument("engine: floor(alpha * particles) must lie in [1, particles - 1]");
  if (replications < 1) throw std::invalid_argument("engine: replications must be >= 1");
  if (!(min_acceptance > 0.0 && min_acceptance <= 1.0))
    throw std::invalid_argument("engine: min_acceptance must lie in (0, 1]");
  if (max_perturb_retries < 1) throw std::invalid_argument("engine: max_perturb_retries must be >= 1");
}

std::vector<double> PosteriorApproximation::tolerances() const {
  std::vector<double> out;
  for (const auto& r : history) out.push_back(r.tolerance);
  return out;
}

std::vector<double> PosteriorApproximation::acceptance_rates() const {
  std::vector<double> out;
  for (const auto& r : history) out.push_back(r.acceptance);
  return out;
}

double PosteriorApproximation::mean(std::string_view name) const {
  double s = 0.0, w = 0.0;
  for (const auto& p : population.particles) {
    s += p.weight * p.theta[name];
    w += p.weight;
  }
  return s / w;
}

double PosteriorApproximation::stddev(std::string_view name) const {
  const double mu = mean(name);
  double s = 0.0, w = 0.0;
  for (const auto& p : population.particles) {
    const double d = p.theta[name] - mu;
    s += p.weight * d * d;
    w += p.weight;
  }
  return std::sqrt(s / w);
}

std::size_t resample_index(std::span<const double> weights, RandomStream& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("resample_index: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("resample_index: all weights are zero");
  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    last_positive = k;
    cumulative += weights[k];
    if (u < cumulative) return k;
  }
  return last_positive;  // rounding at the top end
}

ParameterVector perturb(const ParameterVector& theta_star, const PerturbationKernel& kernel, const Prior& prior,
                        RandomStream& rng, std::size_t max_retries) {
  if (kernel.dims() != theta_star.values.size())
    throw std::invalid_argument("perturb: kernel dimension does not match theta");
  ParameterVector candidate = theta_star;
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    candidate.values = theta_star.values + kernel.draw(rng);
    if (prior_density(prior, candidate) > 0.0) return candidate;
  }
  throw std::runtime_error("perturb: no in-support proposal after " + std::to_string(max_retries) + " draws");
}

double compute_weight(const ParameterVector& theta, const Population& previous, const PerturbationKernel& kernel,
                      const Prior& prior, bool indicator) {
  if (previous.particles.empty()) throw std::invalid_argument("compute_weight: empty previous population");
  if (!indicator) return 0.0;
  const double p = prior_density(prior, theta);
  if (p == 0.0) return 0.0;
  const double total = previous.total_weight();
  if (!(total > 0.0)) throw std::invalid_argument("compute_weight: previous population has zero total weight");

  // log-sum-exp over the kernel mixture
  std::vector<double> terms;
  terms.reserve(previous.particles.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& q : previous.particles) {
    if (q.weight <= 0.0) continue;
    double t = std::log(q.weight / total) + kernel.log_density(theta.values, q.theta.values);
    terms.push_back(t);
    top = std::max(top, t);
  }
  if (!std::isfinite(top))
    throw std::runtime_error("compute_weight: kernel mixture density is zero (kernel too narrow)");
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  const double w = std::exp(std::log(p) - (top + std::log(acc)));
  if (!std::isfinite(w)) throw std::runtime_error("compute_weight: kernel mixture density underflows (kernel too narrow)");
  return w;
}

double order_statistic(std::span<const double> values, std::size_t rank) {
  if (values.empty()) throw std::invalid_argument("order_statistic: no values");
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::vector<double> v(values.begin(), values.end());
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

double adapt_tolerance(std::span<const double> distances, double alpha) {
  const auto rank = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(distances.size())));
  return order_statistic(distances, std::max<std::size_t>(rank, 1));
}

PerturbationKernel adapt_kernel(const Population& population) {
  if (population.particles.empty()) throw std::invalid_argument("adapt_kernel: empty population");
  const double total = population.total_weight();
  if (!(total > 0.0)) throw std::invalid_argument("adapt_kernel: zero total weight");
  const Eigen::Index d = population.particles.front().theta.values.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& p : population.particles) mean += (p.weight / total) * p.theta.values;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : population.particles) {
    Eigen::VectorXd c = p.theta.values - mean;
    cov.noalias() += (p.weight / total) * c * c.transpose();
  }
  cov *= 2.0;
  cov.diagonal().array() += 1e-10 * cov.trace();
  return PerturbationKernel(std::move(cov));
}

namespace {

struct Candidate {
  ParameterVector theta;
  double distance = 0.0;
};

class Evaluator {
 public:
  Evaluator(const StochasticModel& model, const Discrepancy& discrepancy, std::size_t per_particle,
            std::uint64_t seed)
      : model_(model), discrepancy_(discrepancy), per_particle_(per_particle), seed_(seed) {}

  double operator()(const ParameterVector& theta, std::uint64_t generation, std::uint64_t slot) {
    Dataset sim;
    sim.trajectories.reserve(per_particle_);
    for (std::size_t j = 0; j < per_particle_; ++j) {
      RandomStream rng = make_stream(seed_, StreamTag::simulation, {generation, slot, j});
      sim.trajectories.push_back(observe(model_.simulate(theta, rng)));
      calls_.fetch_add(1, std::memory_order_relaxed);
    }
    const double q = discrepancy_(sim);
    if (!std::isfinite(q)) throw std::runtime_error("distance is not finite");
    return q;
  }

  std::uint64_t calls() const { return calls_.load(); }

 private:
  const StochasticModel& model_;
  const Discrepancy& discrepancy_;
  std::size_t per_particle_;
  std::uint64_t seed_;
  std::atomic<std::uint64_t> calls_{0};
};

template <typename Fn>
void for_each_particle(std::size_t count, std::size_t workers, int generation, Fn&& fn) {
  parallel_for(count, workers, [&](std::size_t n) {
    try {
      fn(n);
    } catch (const std::exception& e) {
      throw EngineError("particle " + std::to_string(n) + ": " + e.what(), generation);
    }
  });
}

Population retain(std::vector<Particle> pool, double tolerance, int generation) {
  Population out;
  out.tolerance = tolerance;
  out.generation = generation;
  for (auto& p : pool)
    if (p.distance <= tolerance) out.particles.push_back(std::move(p));
  return out;
}

}  // namespace

PosteriorApproximation run_abc_smc(const Prior& prior, const StochasticModel& model, const Discrepancy& discrepancy,
                                   std::size_t observed_count, const SmcConfig& config,
                                   const ProgressCallback& progress) {
  config.validate();
  if (observed_count < 1) throw std::invalid_argument("run_abc_smc: empty observed dataset");
  const auto names = model.parameter_names();
  if (names != prior.names()) throw std::invalid_argument("run_abc_smc: prior and model parameter names differ");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  const std::size_t N = config.particles;
  const std::size_t kept = config.retained_count();
  const std::size_t refill = N - kept;
  Evaluator evaluate(model, discrepancy, observed_count * config.replications, config.seed);

  PosteriorApproximation result;
  auto record = [&](const Population& pop, double acceptance) {
    GenerationRecord r;
    r.generation = pop.generation;
    r.tolerance = pop.tolerance;
    r.acceptance = acceptance;
    r.simulator_calls = evaluate.calls();
    r.elapsed_seconds = elapsed();
    r.retained = pop.particles.size();
    for (const auto& p : pop.particles) r.max_retained_distance = std::max(r.max_retained_distance, p.distance);
    result.history.push_back(r);
    if (progress) progress(r);
  };

  // Prior draws, weight 1.
  std::vector<Particle> pool(N);
  for_each_particle(N, config.workers, 0, [&](std::size_t n) {
    RandomStream rng = make_stream(config.seed, StreamTag::proposal, {0, n});
    Particle p;
    p.theta = sample_prior(prior, rng);
    p.weight = 1.0;
    p.distance = evaluate(p.theta, 0, n);
    pool[n] = std::move(p);
  });

  std::vector<double> distances(N);
  for (std::size_t n = 0; n < N; ++n) distances[n] = pool[n].distance;
  Population current = retain(std::move(pool), order_statistic(distances, kept), 1);
  double acceptance = 1.0;
  record(current, acceptance);

  int g = 2;
  while (acceptance > config.min_acceptance) {
    if (result.refinement_loops() >= config.max_generations) {
      result.hit_generation_cap = true;
      break;
    }
    const PerturbationKernel kernel = adapt_kernel(current);
    const std::vector<double> resample_weights = current.weights();
    const double previous_tolerance = current.tolerance;

    std::vector<Particle> fresh(refill);
    for_each_particle(refill, config.workers, g, [&](std::size_t slot) {
      RandomStream rng = make_stream(config.seed, StreamTag::proposal, {static_cast<std::uint64_t>(g), slot});
      const auto& star = current.particles[resample_index(resample_weights, rng)].theta;
      Particle p;
      p.theta = perturb(star, kernel, prior, rng, config.max_perturb_retries);
      p.distance = evaluate(p.theta, static_cast<std::uint64_t>(g), slot);
      p.weight = compute_weight(p.theta, current, kernel, prior, p.distance <= previous_tolerance);
      fresh[slot] = std::move(p);
    });

    std::size_t accepted = 0;
    for (const auto& p : fresh) accepted += p.distance <= previous_tolerance ? 1 : 0;
    acceptance = static_cast<double>(accepted) / static_cast<double>(refill);

    std::vector<Particle> combined = std::move(current.particles);
    for (auto& p : fresh) combined.push_back(std::move(p));
    distances.clear();
    for (const auto& p : combined) distances.push_back(p.distance);
    const double tolerance = order_statistic(distances, kept);
    current = retain(std::move(combined), tolerance, g);
    if (!(current.total_weight() > 0.0))
      throw EngineError("retained population has zero total weight (prior/kernel mismatch)", g);
    record(current, acceptance);
    ++g;
  }

  const double total = current.total_weight();
  for (auto& p : current.particles) p.weight /= total;
  result.population = std::move(current);
  result.simulator_calls = evaluate.calls();
  result.elapsed_seconds = elapsed();
  return result;
}

}  // namespace auxabc
