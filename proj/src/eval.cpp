#include "auxabc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "auxabc/distance.hpp"
#include "auxabc/parallel.hpp"

namespace auxabc {

std::vector<double> PredictiveSample::column(Eigen::Index c) const {
  std::vector<double> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) out[static_cast<std::size_t>(i)] = values(i, c);
  return out;
}

namespace {

void check_target(const Trajectory& tr, int target_t) {
  if (target_t < 1 || target_t > tr.states.rows())
    throw std::invalid_argument("target_t " + std::to_string(target_t) + " outside 1.." +
                                std::to_string(tr.states.rows()));
}

}  // namespace

PredictiveSample sample_posterior_predictive(const PosteriorApproximation& posterior, const StochasticModel& model,
                                             int target_t, std::size_t draws, std::uint64_t key,
                                             PredictiveWeighting weighting, std::string source) {
  if (draws < 1) throw std::invalid_argument("sample_posterior_predictive: need at least one draw");
  const auto& particles = posterior.population.particles;
  if (particles.empty()) throw std::invalid_argument("sample_posterior_predictive: empty posterior");
  std::vector<double> weights = posterior.population.weights();
  if (weighting == PredictiveWeighting::uniform) std::fill(weights.begin(), weights.end(), 1.0);

  PredictiveSample out;
  out.source = std::move(source);
  for (std::size_t k = 0; k < draws; ++k) {
    RandomStream rng = replicate_stream(key, k);
    const auto& theta = particles[resample_index(weights, rng)].theta;
    Trajectory tr = model.simulate(theta, rng);
    check_target(tr, target_t);
    if (k == 0) out.values.resize(static_cast<Eigen::Index>(draws), tr.states.cols());
    out.values.row(static_cast<Eigen::Index>(k)) = tr.states.row(target_t - 1);
  }
  return out;
}

PredictiveSample sample_reference_predictive(const StochasticModel& model, const ParameterVector& theta, int target_t,
                                             std::size_t draws, std::uint64_t key) {
  if (draws < 1) throw std::invalid_argument("sample_reference_predictive: need at least one draw");
  PredictiveSample out;
  out.source = "true-model";
  for (std::size_t k = 0; k < draws; ++k) {
    RandomStream rng = replicate_stream(key, k);
    Trajectory tr = model.simulate(theta, rng);
    check_target(tr, target_t);
    if (k == 0) out.values.resize(static_cast<Eigen::Index>(draws), tr.states.cols());
    out.values.row(static_cast<Eigen::Index>(k)) = tr.states.row(target_t - 1);
  }
  return out;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < x.size() && j < y.size()) {
    // step both CDFs past every copy of the next merged value
    const double s = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == s) ++i;
    while (j < y.size() && y[j] == s) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return sup;
}

ConfidenceInterval confidence_interval(std::span<const double> values) {
  ConfidenceInterval ci;
  ci.count = values.size();
  if (values.empty()) return ci;
  double s = 0.0;
  for (double v : values) s += v;
  ci.mean = s / static_cast<double>(values.size());
  if (values.size() < 2) return ci;
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  ci.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  ci.half_width = 1.96 * ci.stddev / std::sqrt(static_cast<double>(values.size()));
  return ci;
}

std::vector<const ReplicationRecord*> MacroReplicationReport::successful() const {
  std::vector<const ReplicationRecord*> out;
  for (const auto& r : replications)
    if (r.ok) out.push_back(&r);
  return out;
}

ReplicationRecord run_replication(const MacroReplicationConfig& config, std::size_t index,
                                  std::size_t engine_workers) {
  ReplicationRecord rec;
  rec.index = index;
  const std::uint64_t rep_seed = config.seed + index;
  const ErythroblastModel model(config.setup);
  const ParameterVector truth =
      config.truth.size() ? config.truth : ErythroblastModel::reference_parameters(config.noise).to_vector();

  const Dataset observed = generate_dataset(model, truth, config.batches, 1,
                                            derive_key(rep_seed, {static_cast<std::uint64_t>(StreamTag::observed)}));
  rec.reference = sample_reference_predictive(
      model, truth, config.target_t, config.predictive_samples,
      derive_key(rep_seed, {static_cast<std::uint64_t>(StreamTag::reference)}));
  const auto ref_rho = rec.reference.column(0);
  const auto ref_inh = rec.reference.column(1);

  SmcConfig engine = config.engine;
  engine.seed = rep_seed;
  engine.workers = engine_workers;
  const std::uint64_t predictive_key = derive_key(rep_seed, {static_cast<std::uint64_t>(StreamTag::predictive)});

  auto run_method = [&](DistanceKind kind) {
    MethodOutcome out;
    auto discrepancy = make_discrepancy(kind, observed, config.standardization);
    ProgressCallback progress;
    if (config.progress) progress = [&](const GenerationRecord& g) { config.progress(index, kind, g); };
    out.posterior = run_abc_smc(config.prior, model, *discrepancy, observed.size(), engine, progress);
    out.runtime_seconds = out.posterior.elapsed_seconds;
    out.predictive = sample_posterior_predictive(out.posterior, model, config.target_t, config.predictive_samples,
                                                 predictive_key, config.weighting, std::string(to_string(kind)));
    out.ks_rho = ks_statistic(ref_rho, out.predictive.column(0));
    out.ks_inhibitor = ks_statistic(ref_inh, out.predictive.column(1));
    return out;
  };
  // sequential so the two wall times do not compete with each other
  rec.auxiliary = run_method(DistanceKind::auxiliary);
  rec.naive = run_method(DistanceKind::naive);
  rec.ratio = rec.naive.runtime_seconds / rec.auxiliary.runtime_seconds;
  rec.ok = true;
  return rec;
}

MacroReplicationReport run_macro_replications(const MacroReplicationConfig& config) {
  if (config.macro_replications < 2) throw std::invalid_argument("macro replications: R must be >= 2");
  MacroReplicationReport report;
  report.config = config;
  const std::size_t R = config.macro_replications;
  const std::size_t total_workers = resolve_workers(config.workers);
  const std::size_t outer = std::min(total_workers, R);
  const std::size_t inner = std::max<std::size_t>(1, total_workers / outer);

  report.replications.resize(R);
  parallel_for(R, outer, [&](std::size_t r) {
    try {
      report.replications[r] = run_replication(config, r, inner);
    } catch (const std::exception& e) {
      report.replications[r].index = r;
      report.replications[r].ok = false;
      report.replications[r].error = e.what();
    }
  });

  for (const auto& rec : report.replications) {
    if (rec.ok) continue;
    ++report.failures;
    report.warnings.push_back("replication " + std::to_string(rec.index) + " failed: " + rec.error);
  }
  if (report.failures * 5 >= R)
    throw std::runtime_error("macro replications: " + std::to_string(report.failures) + " of " + std::to_string(R) +
                             " replications failed" +
                             (report.warnings.empty() ? std::string{} : "; first: " + report.warnings.front()));

  std::vector<double> ks_rho_aux, ks_inh_aux, ks_rho_naive, ks_inh_naive, ratios;
  for (const auto* rec : report.successful()) {
    ks_rho_aux.push_back(rec->auxiliary.ks_rho);
    ks_inh_aux.push_back(rec->auxiliary.ks_inhibitor);
    ks_rho_naive.push_back(rec->naive.ks_rho);
    ks_inh_naive.push_back(rec->naive.ks_inhibitor);
    ratios.push_back(rec->ratio);
  }
  report.ks_rho_auxiliary = confidence_interval(ks_rho_aux);
  report.ks_inhibitor_auxiliary = confidence_interval(ks_inh_aux);
  report.ks_rho_naive = confidence_interval(ks_rho_naive);
  report.ks_inhibitor_naive = confidence_interval(ks_inh_naive);
  report.ratio = confidence_interval(ratios);
  return report;
}

}  // namespace auxabc
