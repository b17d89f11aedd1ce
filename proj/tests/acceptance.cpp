// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Optional argument: comma-separated list of criterion numbers to run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "auxabc/eval.hpp"
#include "auxabc/lgdbn.hpp"
#include "auxabc/smc.hpp"

using namespace auxabc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SmcConfig desk_engine(std::uint64_t seed) {
  SmcConfig c;
  c.particles = 200;
  c.replications = 30;
  c.seed = seed;
  return c;
}

MacroReplicationConfig desk_cell(double v, std::size_t m, std::size_t R) {
  MacroReplicationConfig c;
  c.engine = desk_engine(0);
  c.noise = v;
  c.batches = m;
  c.macro_replications = R;
  c.seed = 0;
  return c;
}

// ---- 1: deterministic dynamics -------------------------------------------

// straight transcription of the recurrence, zero noise
std::vector<std::pair<double, double>> reference_recurrence(double rg, double ks, double kc, double rd, int steps) {
  std::vector<std::pair<double, double>> out{{3.0, 0.0}};
  for (int t = 0; t < steps; ++t) {
    const auto [rho, inh] = out.back();
    const double next_rho = rho + 3.0 * rg * rho / (1.0 + std::exp(-ks * (kc - inh)));
    const double next_inh = inh + (next_rho - rho) - 3.0 * rd * inh;
    out.emplace_back(next_rho, next_inh);
  }
  return out;
}

Outcome criterion_dynamics() {
  ErythroblastModel model({});
  RandomStream rng(1);
  const Trajectory tr = model.simulate(ErythroblastModel::reference_parameters(0.0), rng);
  // by hand: 3 + 0.513 / (1 + e^-8.84) = 3.512926
  const double rho2 = tr.states(1, 0), inh2 = tr.states(1, 1);
  const bool step_ok = std::abs(rho2 - 3.5129) < 1e-3 && std::abs(inh2 - 0.5129) < 1e-3;
  const auto ref = reference_recurrence(0.057, 3.4, 2.6, 0.005, 10);
  double worst = 0.0;
  for (int t = 0; t <= 10; ++t) {
    worst = std::max(worst, std::abs(tr.states(t, 0) - ref[t].first) / std::abs(ref[t].first));
    if (ref[t].second != 0.0) worst = std::max(worst, std::abs(tr.states(t, 1) - ref[t].second) / std::abs(ref[t].second));
    else worst = std::max(worst, std::abs(tr.states(t, 1)));
  }
  return {step_ok && worst < 1e-9 && tr.states.rows() == 11,
          fmt("rho_2=%.6f I_2=%.6f, 11-step max relative error %.2e", rho2, inh2, worst)};
}

// ---- 2, 3: auxiliary model ----------------------------------------------

struct ScalarChain {
  std::vector<double> mu, psi, cond_sd;  // psi[t] links t -> t+1; cond_sd[0] is the initial sd
};

Dataset sample_chain(const ScalarChain& c, std::size_t m, std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t T = c.mu.size();
  Dataset d;
  for (std::size_t i = 0; i < m; ++i) {
    Trajectory tr;
    tr.states.resize(static_cast<Eigen::Index>(T), 1);
    tr.actions.resize(static_cast<Eigen::Index>(T - 1), 0);
    tr.states(0, 0) = c.mu[0] + c.cond_sd[0] * rng.normal();
    for (std::size_t t = 0; t + 1 < T; ++t)
      tr.states(static_cast<Eigen::Index>(t + 1), 0) =
          c.mu[t + 1] + c.psi[t] * (tr.states(static_cast<Eigen::Index>(t), 0) - c.mu[t]) + c.cond_sd[t + 1] * rng.normal();
    d.trajectories.push_back(tr);
  }
  return d;
}

Outcome criterion_mle_consistency() {
  const ScalarChain c{{1.0, -0.5, 2.0, 0.3}, {0.6, 0.85, 0.7}, {0.5, 0.4, 0.3, 0.6}};
  const AuxiliaryFit f = fit_mle(sample_chain(c, 10000, 2));
  // v_t is a marginal std: var_{t+1} = psi_t^2 var_t + s_{t+1}^2
  double var = c.cond_sd[0] * c.cond_sd[0];
  double err = std::abs(f.v_x(0, 0) - std::sqrt(var));
  for (std::size_t t = 0; t < 4; ++t) err = std::max(err, std::abs(f.mu_x(static_cast<Eigen::Index>(t), 0) - c.mu[t]));
  for (std::size_t t = 0; t < 3; ++t) {
    err = std::max(err, std::abs(f.psi_x[t](0, 0) - c.psi[t]));
    var = c.psi[t] * c.psi[t] * var + c.cond_sd[t + 1] * c.cond_sd[t + 1];
    err = std::max(err, std::abs(f.v_x(static_cast<Eigen::Index>(t + 1), 0) - std::sqrt(var)));
  }
  return {err < 0.05, fmt("max |error| over mu, psi, v at m=10^4: %.4f (bound 0.05)", err)};
}

Outcome criterion_joint_covariance() {
  // d_x = 2, d_a = 1, H = 3: exercises both coefficient blocks
  RandomStream rng(3);
  AuxiliaryFit f;
  f.horizon = 3;
  f.state_dims = 2;
  f.action_dims = 1;
  f.mu_x = Eigen::MatrixXd::NullaryExpr(4, 2, [&] { return rng.uniform(-1, 1); });
  f.mu_a = Eigen::MatrixXd::NullaryExpr(3, 1, [&] { return rng.uniform(-1, 1); });
  f.v_x = Eigen::MatrixXd::NullaryExpr(4, 2, [&] { return rng.uniform(0.3, 1.0); });
  f.sigma = Eigen::MatrixXd::NullaryExpr(3, 1, [&] { return rng.uniform(0.3, 1.0); });
  for (int t = 0; t < 3; ++t) {
    f.psi_x.push_back(Eigen::MatrixXd::NullaryExpr(2, 2, [&] { return rng.uniform(-0.7, 0.7); }));
    f.psi_a.push_back(Eigen::MatrixXd::NullaryExpr(2, 1, [&] { return rng.uniform(-0.7, 0.7); }));
  }
  const JointGaussian law = joint_distribution(f);

  // independent forward sampler in stacked order x_1, a_1, x_2, a_2, x_3, a_3, x_4
  const int n = 100000;
  const Eigen::Index p = law.mean.size();
  Eigen::MatrixXd Z(n, p);
  RandomStream draw(4);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(2), a(1);
    for (int k = 0; k < 2; ++k) x[k] = f.mu_x(0, k) + f.v_x(0, k) * draw.normal();
    Eigen::Index col = 0;
    for (int t = 0; t < 3; ++t) {
      a[0] = f.mu_a(t, 0) + f.sigma(t, 0) * draw.normal();
      Z.block(i, col, 1, 2) = x.transpose();
      Z(i, col + 2) = a[0];
      col += 3;
      Eigen::VectorXd next = f.mu_x.row(t + 1).transpose() + f.psi_x[t] * (x - f.mu_x.row(t).transpose()) +
                             f.psi_a[t] * (a - f.mu_a.row(t).transpose());
      for (int k = 0; k < 2; ++k) next[k] += f.v_x(t + 1, k) * draw.normal();
      x = next;
    }
    Z.block(i, col, 1, 2) = x.transpose();
  }
  const Eigen::RowVectorXd mean = Z.colwise().mean();
  const Eigen::MatrixXd centered = Z.rowwise() - mean;
  const Eigen::MatrixXd emp = centered.transpose() * centered / (n - 1.0);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < p; ++r)
    for (Eigen::Index c = 0; c < p; ++c) {
      const double se = std::sqrt((law.covariance(r, r) * law.covariance(c, c) + law.covariance(r, c) * law.covariance(r, c)) / n);
      worst = std::max(worst, std::abs(emp(r, c) - law.covariance(r, c)) / se);
    }
  return {worst < 5.0, fmt("%ldx%ld covariance, worst entry %.2f standard errors (bound 5)", static_cast<long>(p),
                           static_cast<long>(p), worst)};
}

// ---- 4, 5: engine ---------------------------------------------------------

class NormalMean final : public StochasticModel {
 public:
  std::vector<std::string> parameter_names() const override { return {"theta"}; }
  Trajectory simulate(const ParameterVector& theta, RandomStream& rng) const override {
    Trajectory tr;
    tr.states = Eigen::MatrixXd::Zero(2, 1);
    tr.actions.resize(1, 0);
    tr.states(1, 0) = theta.values[0] + rng.normal();
    return tr;
  }
};

std::pair<double, double> sample_moments(const Dataset& d) {
  double s = 0, ss = 0;
  for (const auto& tr : d.trajectories) s += tr.states(1, 0);
  const double n = static_cast<double>(d.size()), mu = s / n;
  for (const auto& tr : d.trajectories) ss += std::pow(tr.states(1, 0) - mu, 2);
  return {mu, std::sqrt(ss / n)};
}

class MomentDistance final : public Discrepancy {
 public:
  explicit MomentDistance(const Dataset& obs) : obs_(sample_moments(obs)) {}
  double operator()(const Dataset& sim) const override {
    const auto s = sample_moments(sim);
    return std::hypot(s.first - obs_.first, s.second - obs_.second);
  }
  std::string name() const override { return "moments"; }

 private:
  std::pair<double, double> obs_;
};

Outcome criterion_conjugate_toy() {
  const Prior prior({"theta"}, {{-10.0, 10.0}});
  const double sd = std::sqrt(1.0 / 20.0);
  std::vector<double> mean_err, ks;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset obs =
        generate_dataset(NormalMean(), ParameterVector({"theta"}, Eigen::VectorXd::Constant(1, 2.0)), 20, 1, 500 + seed);
    const double xbar = sample_moments(obs).first;
    MomentDistance d(obs);
    SmcConfig c;
    c.particles = 1000;
    c.replications = 1;
    c.seed = seed;
    const auto post = run_abc_smc(prior, NormalMean(), d, obs.size(), c);
    mean_err.push_back(std::abs(post.mean("theta") - xbar) / sd);

    RandomStream rng(derive_key(seed, {9}));
    const auto w = post.population.weights();
    std::vector<double> abc(2000), exact(2000);
    for (auto& x : abc) x = post.population.particles[resample_index(w, rng)].theta.values[0];
    for (auto& x : exact) x = rng.normal(xbar, sd);
    ks.push_back(ks_statistic(abc, exact));
  }
  const double me = median(mean_err), mk = median(ks);
  return {me < 0.3 && mk < 0.15,
          fmt("median |mean error| %.3f analytic sd (bound 0.3), median K-S %.3f (bound 0.15)", me, mk)};
}

Outcome criterion_engine_invariants() {
  ErythroblastModel model({});
  const Dataset obs =
      generate_dataset(model, ErythroblastModel::reference_parameters(0.1).to_vector(), 6, 1, derive_key(0, {1}));
  AuxiliaryDiscrepancy d(obs);
  SmcConfig c = desk_engine(0);
  c.workers = 1;
  const auto a = run_abc_smc(ErythroblastModel::reference_prior(), model, d, obs.size(), c);
  c.workers = 8;
  const auto b = run_abc_smc(ErythroblastModel::reference_prior(), model, d, obs.size(), c);

  std::vector<std::string> broken;
  const auto h = a.tolerances();
  for (std::size_t i = 1; i < h.size(); ++i)
    if (h[i] > h[i - 1]) broken.push_back("tolerance increased");
  double total = 0.0;
  for (const auto& p : a.population.particles) {
    total += p.weight;
    if (p.distance > a.population.tolerance) broken.push_back("retained distance above tolerance");
  }
  if (std::abs(total - 1.0) > 1e-12) broken.push_back("weights do not sum to 1");
  const std::uint64_t per = obs.size() * c.replications;
  const std::uint64_t expected = per * (c.particles + (c.particles - c.retained_count()) * a.refinement_loops());
  if (a.simulator_calls != expected) broken.push_back("simulator calls differ from the closed form");
  bool same = a.population.particles.size() == b.population.particles.size() && a.tolerances() == b.tolerances();
  for (std::size_t i = 0; same && i < a.population.particles.size(); ++i)
    same = a.population.particles[i].theta == b.population.particles[i].theta &&
           a.population.particles[i].weight == b.population.particles[i].weight;
  if (!same) broken.push_back("1 and 8 workers disagree");
  std::string detail = fmt("%zu generations, %llu simulator calls", h.size(), static_cast<unsigned long long>(a.simulator_calls));
  for (const auto& s : broken) detail += "; " + s;
  return {broken.empty(), detail};
}

// ---- 6, 7, 8: desk-scale comparisons ----------------------------------------

Outcome criterion_ks_ordering() {
  const auto report = run_macro_replications(desk_cell(0.2, 6, 10));
  int wins = 0;
  for (const auto* r : report.successful()) wins += r->auxiliary.ks_inhibitor < r->naive.ks_inhibitor;
  const double aux = report.ks_inhibitor_auxiliary.mean, naive = report.ks_inhibitor_naive.mean;
  const bool pass = report.failures == 0 && aux < naive && naive - aux >= 0.05 && wins >= 8;
  return {pass, fmt("mean K-S(I) auxiliary %.3f +- %.3f vs naive %.3f +- %.3f, gap %.3f (need >= 0.05), "
                    "auxiliary lower in %d of %zu (need 8)",
                    aux, report.ks_inhibitor_auxiliary.half_width, naive, report.ks_inhibitor_naive.half_width,
                    naive - aux, wins, report.successful().size())};
}

Outcome criterion_runtime_ratio() {
  const auto report = run_macro_replications(desk_cell(0.2, 20, 5));
  std::string per;
  for (const auto* r : report.successful())
    per += fmt(" %.2f(G %zu/%zu)", r->ratio, r->naive.posterior.history.size(), r->auxiliary.posterior.history.size());
  return {report.failures == 0 && report.ratio.mean > 1.0,
          fmt("mean T_naive/T_aux %.3f +- %.3f (need > 1); per replication, with naive/auxiliary generations:",
              report.ratio.mean, report.ratio.half_width) + per};
}

Outcome criterion_concentration() {
  const auto report = run_macro_replications(desk_cell(0.1, 20, 10));
  int mass_ok = 0, tighter = 0, both = 0;
  for (const auto* r : report.successful()) {
    const auto& pop = r->auxiliary.posterior.population;
    const auto w = pop.normalized_weights();
    double mass = 0.0;
    for (std::size_t i = 0; i < pop.particles.size(); ++i)
      if (std::abs(pop.particles[i].theta["r_g"] - 0.057) <= 0.03) mass += w[i];
    const bool m = mass >= 0.5;
    const bool t = r->auxiliary.posterior.stddev("r_g") < r->naive.posterior.stddev("r_g");
    mass_ok += m;
    tighter += t;
    both += m && t;
  }
  return {report.failures == 0 && both >= 7,
          fmt("runs with >= 50%% auxiliary mass within 0.057 +- 0.03: %d of 10; auxiliary sd below naive: %d of 10; "
              "both: %d (need 7)",
              mass_ok, tighter, both)};
}

// ---- 9: K-S oracle ---------------------------------------------------------

Outcome criterion_ks_oracle() {
  RandomStream rng(9);
  int mismatches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(1 + rng() % 12), b(1 + rng() % 12);
    for (auto& x : a) x = static_cast<double>(rng() % 8);
    for (auto& y : b) y = static_cast<double>(rng() % 8) + 0.5 * static_cast<double>(rng() % 2);
    double brute = 0.0;
    for (const auto* sample : {&a, &b})
      for (double s : *sample) {
        double fa = 0, fb = 0;
        for (double x : a) fa += x <= s ? 1 : 0;
        for (double y : b) fb += y <= s ? 1 : 0;
        brute = std::max(brute, std::abs(fa / static_cast<double>(a.size()) - fb / static_cast<double>(b.size())));
      }
    mismatches += ks_statistic(a, b) != brute;
  }
  return {mismatches == 0, fmt("%d of 100 pairs differ from the double loop", mismatches)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "deterministic dynamics oracle", 1.0, criterion_dynamics},
      {2, "auxiliary MLE consistency", 30.0, criterion_mle_consistency},
      {3, "joint covariance oracle", 60.0, criterion_joint_covariance},
      {4, "conjugate toy posterior", 300.0, criterion_conjugate_toy},
      {5, "engine invariants", 300.0, criterion_engine_invariants},
      {6, "K-S ordering for the inhibitor (v=0.2, m=6, R=10)", 7200.0, criterion_ks_ordering},
      {7, "wall-time ratio direction (v=0.2, m=20, R=5)", 7200.0, criterion_runtime_ratio},
      {8, "posterior concentration of r_g (v=0.1, m=20)", 7200.0, criterion_concentration},
      {9, "K-S brute-force oracle", 10.0, criterion_ks_oracle},
  };
  std::set<int> only;
  if (argc > 1) {
    std::stringstream ss(argv[1]);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
  }

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      out.pass = false;
      out.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failed += !out.pass;
    std::printf("criterion %d [%s] %s: %s (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
