#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "auxabc/eval.hpp"

using namespace auxabc;

namespace {

double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  double best = 0;
  for (double s : pts) {
    double fa = 0, fb = 0;
    for (double x : a) fa += x <= s;
    for (double y : b) fb += y <= s;
    best = std::max(best, std::abs(fa / a.size() - fb / b.size()));
  }
  return best;
}

PosteriorApproximation point_posterior(std::vector<ParameterVector> thetas, std::vector<double> weights) {
  PosteriorApproximation post;
  for (std::size_t i = 0; i < thetas.size(); ++i) post.population.particles.push_back({thetas[i], weights[i], 0.0});
  return post;
}

MacroReplicationConfig tiny_cell() {
  MacroReplicationConfig c;
  c.engine.particles = 50;
  c.engine.replications = 5;
  c.batches = 3;
  c.noise = 0.1;
  c.macro_replications = 2;
  c.predictive_samples = 200;
  c.seed = 3;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("K-S examples") {
  const std::vector<double> a{1, 2, 3, 4}, b{3, 4, 5, 6};
  CHECK(ks_statistic(a, b) == 0.5);
  CHECK(ks_statistic(a, a) == 0.0);
  CHECK(ks_statistic(std::vector<double>{1, 2}, std::vector<double>{3, 4, 5}) == 1.0);
  CHECK_THROWS(ks_statistic(std::vector<double>{}, a));
}

TEST_CASE("K-S properties") {
  RandomStream rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(1 + rng() % 15), b(1 + rng() % 15);
    // coarse values so that ties occur
    for (auto& x : a) x = std::round(rng.normal() * 3) / 2;
    for (auto& y : b) y = std::round(rng.normal(0.5, 1) * 3) / 2;
    const double d = ks_statistic(a, b);
    CHECK(d == brute_ks(a, b));
    CHECK(d == ks_statistic(b, a));
    std::vector<double> ta(a), tb(b);
    for (auto& x : ta) x = std::exp(x) + 2;
    for (auto& y : tb) y = std::exp(y) + 2;
    CHECK(ks_statistic(ta, tb) == d);
    std::vector<double> twice(a);
    twice.insert(twice.end(), a.begin(), a.end());
    CHECK(ks_statistic(a, twice) == 0.0);
  }
}

TEST_CASE("confidence interval formula") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto ci = confidence_interval(v);
  CHECK(ci.mean == 3.0);
  CHECK(ci.stddev == doctest::Approx(std::sqrt(2.5)));
  CHECK(ci.half_width == doctest::Approx(1.96 * std::sqrt(2.5) / std::sqrt(5.0)));
  CHECK(ci.count == 5);

  // fixed spread, four times the replications, half the width
  std::vector<double> small, large;
  for (int i = 0; i < 10; ++i) small.push_back(i % 2 ? 1.0 : -1.0);
  for (int i = 0; i < 40; ++i) large.push_back(i % 2 ? 1.0 : -1.0);
  const double ratio = confidence_interval(small).half_width / confidence_interval(large).half_width;
  CHECK(ratio == doctest::Approx(2.0 * std::sqrt(39.0 / 40.0) / std::sqrt(9.0 / 10.0)));
}

TEST_CASE("predictive from a noise-free point mass is the deterministic state") {
  ErythroblastModel model({});
  const auto theta = ErythroblastModel::reference_parameters(0.0).to_vector();
  const auto s = sample_posterior_predictive(point_posterior({theta}, {1.0}), model, 11, 50, 9);
  RandomStream rng(0);
  const Trajectory det = model.simulate(theta, rng);
  CHECK(s.values.rows() == 50);
  for (Eigen::Index k = 0; k < 50; ++k) {
    CHECK(s.values(k, 0) == det.states(10, 0));
    CHECK(s.values(k, 1) == det.states(10, 1));
  }
  CHECK_THROWS(sample_posterior_predictive(point_posterior({theta}, {1.0}), model, 12, 5, 9));
  CHECK_THROWS(sample_posterior_predictive(point_posterior({theta}, {1.0}), model, 0, 5, 9));
  CHECK_THROWS(sample_posterior_predictive(point_posterior({theta}, {1.0}), model, 11, 0, 9));
}

TEST_CASE("a zero-weight component does not change the predictive") {
  ErythroblastModel model({});
  const auto theta = ErythroblastModel::reference_parameters(0.1).to_vector();
  auto other = theta;
  other.set("r_g", 0.2);
  const auto mix = sample_posterior_predictive(point_posterior({theta, other}, {1.0, 0.0}), model, 11, 2000, 1);
  const auto single = sample_posterior_predictive(point_posterior({theta}, {1.0}), model, 11, 2000, 2);
  CHECK(ks_statistic(mix.column(0), single.column(0)) < 0.05);
  CHECK(ks_statistic(mix.column(1), single.column(1)) < 0.05);

  // uniform weighting ignores the weights
  const auto uni = sample_posterior_predictive(point_posterior({theta, other}, {1.0, 0.0}), model, 11, 2000, 1,
                                               PredictiveWeighting::uniform);
  CHECK(ks_statistic(uni.column(0), single.column(0)) > 0.2);
}

TEST_CASE("reference predictive is keyed") {
  ErythroblastModel model({});
  const auto theta = ErythroblastModel::reference_parameters(0.2).to_vector();
  const auto a = sample_reference_predictive(model, theta, 11, 100, 5);
  const auto b = sample_reference_predictive(model, theta, 11, 100, 5);
  CHECK(a.values == b.values);
  CHECK(a.source == "true-model");
}

TEST_CASE("macro replications at smoke scale") {
  const auto report = run_macro_replications(tiny_cell());
  CHECK(report.failures == 0);
  REQUIRE(report.replications.size() == 2);
  CHECK(report.ks_inhibitor_auxiliary.count == 2);
  CHECK(report.ratio.count == 2);
  for (const auto& r : report.replications) {
    CHECK(r.ok);
    CHECK(r.ratio == doctest::Approx(r.naive.runtime_seconds / r.auxiliary.runtime_seconds));
    CHECK(r.auxiliary.runtime_seconds == r.auxiliary.posterior.elapsed_seconds);
    CHECK(r.reference.values.rows() == 200);
    CHECK(r.auxiliary.ks_rho >= 0.0);
    CHECK(r.naive.ks_inhibitor <= 1.0);
  }
  // fresh observed data per replication
  CHECK(report.replications[0].reference.values != report.replications[1].reference.values);
}

TEST_CASE("a replication is reproducible and independent of worker count") {
  MacroReplicationConfig c = tiny_cell();
  const auto a = run_replication(c, 1, 1);
  const auto b = run_replication(c, 1, 3);
  CHECK(a.auxiliary.ks_inhibitor == b.auxiliary.ks_inhibitor);
  CHECK(a.naive.ks_rho == b.naive.ks_rho);
  CHECK(a.auxiliary.predictive.values == b.auxiliary.predictive.values);
}

TEST_CASE("too many failing replications abort") {
  MacroReplicationConfig c = tiny_cell();
  c.prior = Prior(ErythroblastModel::names(),
                  {{1e299, 1e300}, {0, 5}, {0, 5}, {0, 0.05}, {0, 0.2}, {0, 0.2}});
  CHECK_THROWS_AS(run_macro_replications(c), std::runtime_error);
  c.macro_replications = 1;
  CHECK_THROWS_AS(run_macro_replications(c), std::invalid_argument);
}
