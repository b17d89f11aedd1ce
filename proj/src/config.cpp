#include "auxabc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace auxabc {

using nlohmann::json;

namespace {

const std::vector<std::string> kKinetic{"r_g", "k_s", "k_c", "r_d"};

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError(path + "/" + key, "unknown key");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

std::uint64_t as_unsigned(const json& j, const std::string& path) {
  // the parser types positive literals as unsigned, the in-memory builders as signed
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError(path, "expected a non-negative integer");
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

template <class F>
auto parse_enum(const json& j, const std::string& path, F parse) {
  try {
    return parse(as_string(j, path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

void read_model(ModelBlock& m, const json& j, const std::string& path) {
  check_keys(j, path, {"true_parameters", "noise", "batches", "init", "dt", "horizon"});
  if (j.contains("true_parameters")) {
    const auto& tp = j["true_parameters"];
    const std::string p = path + "/true_parameters";
    if (!tp.is_object()) throw ConfigError(p, "expected an object");
    for (const auto& [key, value] : tp.items()) {
      if (std::find(kKinetic.begin(), kKinetic.end(), key) == kKinetic.end())
        throw ConfigError(p + "/" + key, "not a kinetic parameter (expected r_g, k_s, k_c, r_d)");
      m.true_parameters[key] = as_number(value, p + "/" + key);
    }
  }
  if (j.contains("noise")) m.noise = as_number(j["noise"], path + "/noise");
  if (j.contains("batches")) m.batches = as_unsigned(j["batches"], path + "/batches");
  if (j.contains("init")) {
    const auto& init = j["init"];
    check_keys(init, path + "/init", {"rho", "I"});
    if (init.contains("rho")) m.setup.rho0 = as_number(init["rho"], path + "/init/rho");
    if (init.contains("I")) m.setup.inhibitor0 = as_number(init["I"], path + "/init/I");
  }
  if (j.contains("dt")) m.setup.dt = as_number(j["dt"], path + "/dt");
  if (j.contains("horizon")) m.setup.horizon = static_cast<int>(as_unsigned(j["horizon"], path + "/horizon"));
}

void read_prior(std::map<std::string, UniformBound>& prior, const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string p = path + "/" + key;
    if (!value.is_array() || value.size() != 2) throw ConfigError(p, "expected [low, high]");
    prior[key] = {as_number(value[0], p + "/0"), as_number(value[1], p + "/1")};
  }
}

void read_engine(EngineBlock& e, const json& j, const std::string& path) {
  check_keys(j, path,
             {"particles", "alpha", "replications", "min_acceptance", "max_generations", "max_perturb_retries",
              "distance", "standardization", "naive"});
  if (j.contains("particles")) e.particles = as_unsigned(j["particles"], path + "/particles");
  if (j.contains("alpha")) e.alpha = as_number(j["alpha"], path + "/alpha");
  if (j.contains("replications")) e.replications = as_unsigned(j["replications"], path + "/replications");
  if (j.contains("min_acceptance")) e.min_acceptance = as_number(j["min_acceptance"], path + "/min_acceptance");
  if (j.contains("max_generations")) e.max_generations = as_unsigned(j["max_generations"], path + "/max_generations");
  if (j.contains("max_perturb_retries"))
    e.max_perturb_retries = as_unsigned(j["max_perturb_retries"], path + "/max_perturb_retries");
  if (j.contains("distance")) e.distance = parse_enum(j["distance"], path + "/distance", parse_distance_kind);
  if (j.contains("standardization"))
    e.standardization = parse_enum(j["standardization"], path + "/standardization", parse_standardization);
  if (j.contains("naive")) e.naive = as_string(j["naive"], path + "/naive");
}

PredictiveWeighting parse_weighting(std::string_view text) {
  if (text == "weighted") return PredictiveWeighting::weighted;
  if (text == "uniform") return PredictiveWeighting::uniform;
  throw std::invalid_argument("unknown weighting '" + std::string(text) + "' (expected weighted|uniform)");
}

void read_experiment(ExperimentBlock& x, const json& j, const std::string& path) {
  check_keys(j, path, {"noise", "batches", "macro_replications", "predictive_samples", "target_t", "weighting"});
  if (j.contains("noise")) {
    const std::string p = path + "/noise";
    if (!j["noise"].is_array()) throw ConfigError(p, "expected an array");
    x.noise.clear();
    for (std::size_t i = 0; i < j["noise"].size(); ++i)
      x.noise.push_back(as_number(j["noise"][i], p + "/" + std::to_string(i)));
  }
  if (j.contains("batches")) {
    const std::string p = path + "/batches";
    if (!j["batches"].is_array()) throw ConfigError(p, "expected an array");
    x.batches.clear();
    for (std::size_t i = 0; i < j["batches"].size(); ++i)
      x.batches.push_back(as_unsigned(j["batches"][i], p + "/" + std::to_string(i)));
  }
  if (j.contains("macro_replications"))
    x.macro_replications = as_unsigned(j["macro_replications"], path + "/macro_replications");
  if (j.contains("predictive_samples"))
    x.predictive_samples = as_unsigned(j["predictive_samples"], path + "/predictive_samples");
  if (j.contains("target_t")) x.target_t = static_cast<int>(as_unsigned(j["target_t"], path + "/target_t"));
  if (j.contains("weighting")) x.weighting = parse_enum(j["weighting"], path + "/weighting", parse_weighting);
}

}  // namespace

ParameterVector ModelBlock::truth(double v) const {
  ErythroblastParams p{};
  p.r_g = true_parameters.at("r_g");
  p.k_s = true_parameters.at("k_s");
  p.k_c = true_parameters.at("k_c");
  p.r_d = true_parameters.at("r_d");
  p.v_rho = v;
  p.v_I = v;
  return p.to_vector();
}

void ExperimentConfig::validate() const {
  for (const auto& name : kKinetic)
    if (!model.true_parameters.count(name)) throw ConfigError("/model/true_parameters/" + name, "missing");
  if (!(model.noise >= 0.0)) throw ConfigError("/model/noise", "must be >= 0");
  if (model.batches < 2) throw ConfigError("/model/batches", "the auxiliary fit needs at least 2 trajectories");
  if (!(model.setup.dt > 0.0)) throw ConfigError("/model/dt", "must be > 0");
  if (model.setup.horizon < 1) throw ConfigError("/model/horizon", "must be >= 1");

  const auto names = ErythroblastModel::names();
  for (const auto& [key, bound] : prior) {
    if (std::find(names.begin(), names.end(), key) == names.end())
      throw ConfigError("/prior/" + key, "unknown parameter name");
    if (!(bound.low < bound.high)) throw ConfigError("/prior/" + key, "low must be < high");
  }
  for (const auto& name : names)
    if (!prior.count(name)) throw ConfigError("/prior/" + name, "missing");

  if (engine.naive != "mean-curve") throw ConfigError("/engine/naive", "unknown naive distance (expected mean-curve)");
  if (engine.particles < 2) throw ConfigError("/engine/particles", "must be >= 2");
  if (!(engine.alpha > 0.0 && engine.alpha < 1.0)) throw ConfigError("/engine/alpha", "must lie in (0, 1)");
  if (engine.replications < 1) throw ConfigError("/engine/replications", "must be >= 1");
  if (!(engine.min_acceptance > 0.0 && engine.min_acceptance <= 1.0))
    throw ConfigError("/engine/min_acceptance", "must lie in (0, 1]");
  if (engine.max_perturb_retries < 1) throw ConfigError("/engine/max_perturb_retries", "must be >= 1");
  // whatever is left (retained count range) is reported against the block
  try {
    smc().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/engine", e.what());
  }

  if (experiment.noise.empty()) throw ConfigError("/experiment/noise", "empty grid");
  for (std::size_t i = 0; i < experiment.noise.size(); ++i)
    if (!(experiment.noise[i] >= 0.0)) throw ConfigError("/experiment/noise/" + std::to_string(i), "must be >= 0");
  if (experiment.batches.empty()) throw ConfigError("/experiment/batches", "empty grid");
  for (std::size_t i = 0; i < experiment.batches.size(); ++i)
    if (experiment.batches[i] < 2)
      throw ConfigError("/experiment/batches/" + std::to_string(i), "the auxiliary fit needs at least 2 trajectories");
  if (experiment.macro_replications < 2) throw ConfigError("/experiment/macro_replications", "must be >= 2");
  if (experiment.predictive_samples < 1) throw ConfigError("/experiment/predictive_samples", "must be >= 1");
  if (experiment.target_t < 1 || experiment.target_t > model.setup.horizon + 1)
    throw ConfigError("/experiment/target_t", "must lie in 1..horizon+1");
  if (output_dir.empty()) throw ConfigError("/output_dir", "must not be empty");
}

Prior ExperimentConfig::make_prior() const {
  std::vector<std::string> names = ErythroblastModel::names();
  std::vector<UniformBound> bounds;
  for (const auto& n : names) bounds.push_back(prior.at(n));
  return Prior(std::move(names), std::move(bounds));
}

SmcConfig ExperimentConfig::smc() const {
  SmcConfig c;
  c.particles = engine.particles;
  c.alpha = engine.alpha;
  c.replications = engine.replications;
  c.min_acceptance = engine.min_acceptance;
  c.max_generations = engine.max_generations;
  c.max_perturb_retries = engine.max_perturb_retries;
  c.seed = seed;
  c.workers = workers;
  return c;
}

MacroReplicationConfig ExperimentConfig::cell(double noise, std::size_t batches) const {
  MacroReplicationConfig c;
  c.setup = model.setup;
  c.prior = make_prior();
  c.truth = model.truth(noise);
  c.engine = smc();
  c.noise = noise;
  c.batches = batches;
  c.macro_replications = experiment.macro_replications;
  c.predictive_samples = experiment.predictive_samples;
  c.target_t = experiment.target_t;
  c.seed = seed;
  c.workers = workers;
  c.weighting = experiment.weighting;
  c.standardization = engine.standardization;
  return c;
}

std::vector<std::string> preset_names() { return {"desk", "paper"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.output_dir = "out/" + name;
  if (name == "paper") return c;
  if (name == "desk") {
    c.engine.particles = 200;
    c.engine.replications = 30;
    c.experiment.macro_replications = 10;
    return c;
  }
  throw ConfigError("/preset", "unknown preset '" + name + "' (expected desk|paper)");
}

ExperimentConfig apply_json(ExperimentConfig c, const json& j) {
  check_keys(j, "", {"model", "prior", "engine", "experiment", "seed", "output_dir", "input", "workers"});
  if (j.contains("model")) read_model(c.model, j["model"], "/model");
  if (j.contains("prior")) read_prior(c.prior, j["prior"], "/prior");
  if (j.contains("engine")) read_engine(c.engine, j["engine"], "/engine");
  if (j.contains("experiment")) read_experiment(c.experiment, j["experiment"], "/experiment");
  if (j.contains("seed")) c.seed = as_unsigned(j["seed"], "/seed");
  if (j.contains("output_dir")) c.output_dir = as_string(j["output_dir"], "/output_dir");
  if (j.contains("input")) c.input = as_string(j["input"], "/input");
  if (j.contains("workers")) c.workers = as_unsigned(j["workers"], "/workers");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    // comments allowed so the shipped examples can annotate themselves
    j = json::parse(buffer.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
  return apply_json(std::move(base), j);
}

json to_json(const ExperimentConfig& c) {
  json prior = json::object();
  for (const auto& [k, b] : c.prior) prior[k] = {b.low, b.high};
  return {
      {"seed", c.seed},
      {"workers", c.workers},
      {"output_dir", c.output_dir},
      {"input", c.input},
      {"model",
       {{"true_parameters", c.model.true_parameters},
        {"noise", c.model.noise},
        {"batches", c.model.batches},
        {"init", {{"rho", c.model.setup.rho0}, {"I", c.model.setup.inhibitor0}}},
        {"dt", c.model.setup.dt},
        {"horizon", c.model.setup.horizon}}},
      {"prior", prior},
      {"engine",
       {{"particles", c.engine.particles},
        {"alpha", c.engine.alpha},
        {"replications", c.engine.replications},
        {"min_acceptance", c.engine.min_acceptance},
        {"max_generations", c.engine.max_generations},
        {"max_perturb_retries", c.engine.max_perturb_retries},
        {"distance", std::string(to_string(c.engine.distance))},
        {"standardization", std::string(to_string(c.engine.standardization))},
        {"naive", c.engine.naive}}},
      {"experiment",
       {{"noise", c.experiment.noise},
        {"batches", c.experiment.batches},
        {"macro_replications", c.experiment.macro_replications},
        {"predictive_samples", c.experiment.predictive_samples},
        {"target_t", c.experiment.target_t},
        {"weighting", c.experiment.weighting == PredictiveWeighting::weighted ? "weighted" : "uniform"}}},
  };
}

}  // namespace auxabc
