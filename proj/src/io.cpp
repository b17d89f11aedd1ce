#include "auxabc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "auxabc/config.hpp"

namespace auxabc {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

class Writer {
 public:
  Writer(const std::filesystem::path& path, const json& config) : path_(path), out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# auxabc " << kVersion << "\n# config: " << config.dump() << "\n";
  }

  void comment(const std::string& line) { out_ << "# " << line << "\n"; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("error while writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not a number: '" + text + "'");
  }
}

std::vector<std::string> state_columns(Eigen::Index d) {
  if (d == 1) return {"rho"};
  std::vector<std::string> out;
  for (Eigen::Index k = 0; k < d; ++k) out.push_back("x" + std::to_string(k + 1));
  return out;
}

std::string key_value(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  if (pos == std::string::npos) throw std::runtime_error("dataset header lacks " + key);
  const auto start = pos + key.size() + 1;
  return text.substr(start, text.find(' ', start) - start);
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw std::out_of_range("no column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(parse_double(r.at(c), name));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
    } else if (t.columns.empty()) {
      t.columns = split(line);
    } else {
      t.rows.push_back(split(line));
      if (t.rows.back().size() != t.columns.size())
        throw std::runtime_error(path.string() + ": row " + std::to_string(t.rows.size()) + " has " +
                                 std::to_string(t.rows.back().size()) + " fields, expected " +
                                 std::to_string(t.columns.size()));
    }
  }
  return t;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data, const json& config) {
  data.validate();
  const Trajectory& f = data.front();
  const Eigen::Index dx = f.observed_dims(), da = f.action_dims(), H = f.horizon();
  Writer w(path, config);
  w.comment("dataset: horizon=" + std::to_string(H) + " dt=" + format_double(f.dt) +
            " state_dims=" + std::to_string(dx) + " action_dims=" + std::to_string(da));
  std::vector<std::string> header{"trajectory", "t"};
  for (const auto& c : state_columns(dx)) header.push_back(c);
  for (Eigen::Index k = 0; k < da; ++k) header.push_back("a" + std::to_string(k + 1));
  w.row(header);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Trajectory& tr = data.trajectories[i];
    for (Eigen::Index t = 0; t <= H; ++t) {
      std::vector<std::string> cells{std::to_string(i), std::to_string(t + 1)};
      for (Eigen::Index k = 0; k < dx; ++k) cells.push_back(format_double(tr.states(t, k)));
      // no action follows the last state
      for (Eigen::Index k = 0; k < da; ++k) cells.push_back(t < H ? format_double(tr.actions(t, k)) : "");
      w.row(cells);
    }
  }
  w.close();
}

Dataset read_dataset(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::string meta;
  for (const auto& c : t.comments)
    if (c.rfind("dataset:", 0) == 0) meta = c;
  if (meta.empty()) throw std::runtime_error(path.string() + ": missing '# dataset:' header line");
  const Eigen::Index H = std::stol(key_value(meta, "horizon"));
  const double dt = parse_double(key_value(meta, "dt"), "dt");
  const Eigen::Index dx = std::stol(key_value(meta, "state_dims"));
  const Eigen::Index da = std::stol(key_value(meta, "action_dims"));
  if (t.columns.size() != static_cast<std::size_t>(2 + dx + da))
    throw std::runtime_error(path.string() + ": column count does not match the dataset header");
  const std::size_t rows_per = static_cast<std::size_t>(H + 1);
  if (t.rows.empty() || t.rows.size() % rows_per != 0)
    throw std::runtime_error(path.string() + ": row count is not a multiple of horizon+1");

  Dataset data;
  for (std::size_t i = 0; i < t.rows.size() / rows_per; ++i) {
    Trajectory tr;
    tr.dt = dt;
    tr.states.resize(H + 1, dx);
    tr.actions.resize(H, da);
    for (Eigen::Index s = 0; s <= H; ++s) {
      const auto& r = t.rows[i * rows_per + static_cast<std::size_t>(s)];
      const std::string where = path.string() + " trajectory " + std::to_string(i);
      if (parse_double(r[0], where) != static_cast<double>(i) || parse_double(r[1], where) != static_cast<double>(s + 1))
        throw std::runtime_error(where + ": rows out of order at t=" + std::to_string(s + 1));
      for (Eigen::Index k = 0; k < dx; ++k) tr.states(s, k) = parse_double(r[static_cast<std::size_t>(2 + k)], where);
      if (s < H)
        for (Eigen::Index k = 0; k < da; ++k)
          tr.actions(s, k) = parse_double(r[static_cast<std::size_t>(2 + dx + k)], where);
    }
    data.trajectories.push_back(std::move(tr));
  }
  data.validate();
  return data;
}

void write_posterior(const std::filesystem::path& path, const PosteriorApproximation& post, const json& config) {
  const auto& particles = post.population.particles;
  if (particles.empty()) throw std::invalid_argument("write_posterior: empty population");
  Writer w(path, config);
  w.comment("posterior: generations=" + std::to_string(post.history.size()) +
            " tolerance=" + format_double(post.population.tolerance) +
            " simulator_calls=" + std::to_string(post.simulator_calls) +
            " hit_generation_cap=" + (post.hit_generation_cap ? "true" : "false"));
  std::vector<std::string> header = particles.front().theta.names;
  header.push_back("weight");
  header.push_back("distance");
  w.row(header);
  for (const auto& p : particles) {
    std::vector<std::string> cells;
    for (Eigen::Index k = 0; k < p.theta.values.size(); ++k) cells.push_back(format_double(p.theta.values[k]));
    cells.push_back(format_double(p.weight));
    cells.push_back(format_double(p.distance));
    w.row(cells);
  }
  w.close();
}

void write_history(const std::filesystem::path& path, const PosteriorApproximation& post, const json& config) {
  Writer w(path, config);
  w.row({"generation", "tolerance", "acceptance", "simulator_calls", "elapsed_s", "retained"});
  for (const auto& g : post.history)
    w.row({std::to_string(g.generation), format_double(g.tolerance), format_double(g.acceptance),
           std::to_string(g.simulator_calls), format_double(g.elapsed_seconds), std::to_string(g.retained)});
  w.close();
}

void write_replications(const std::filesystem::path& path, const std::vector<CellResult>& cells, const json& config) {
  Writer w(path, config);
  w.row({"replication", "method", "v", "m", "ks_rho", "ks_I", "runtime_s", "ratio", "generations", "simulator_calls"});
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    for (const auto* r : cell.report.successful()) {
      for (const auto* out : {&r->auxiliary, &r->naive}) {
        w.row({std::to_string(r->index), out == &r->auxiliary ? "auxiliary" : "naive", format_double(cell.noise),
               std::to_string(cell.batches), format_double(out->ks_rho), format_double(out->ks_inhibitor),
               format_double(out->runtime_seconds), format_double(r->ratio),
               std::to_string(out->posterior.history.size()), std::to_string(out->posterior.simulator_calls)});
      }
    }
  }
  w.close();
}

void write_ratio_table(const std::filesystem::path& path, const std::vector<CellResult>& cells, const json& config) {
  Writer w(path, config);
  w.comment("ratio = T_naive / T_auxiliary; interval = mean +- 1.96 S / sqrt(R)");
  w.row({"v", "m", "ratio_mean", "ratio_half_width", "ratio_std", "replications", "failed"});
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    const auto& ci = cell.report.ratio;
    w.row({format_double(cell.noise), std::to_string(cell.batches), format_double(ci.mean), format_double(ci.half_width),
           format_double(ci.stddev), std::to_string(ci.count), std::to_string(cell.report.failures)});
  }
  w.close();
}

void write_ks_table(const std::filesystem::path& path, const std::vector<CellResult>& cells, const json& config) {
  Writer w(path, config);
  w.comment("two-sample K-S against the true-model predictive; interval = mean +- 1.96 S / sqrt(R)");
  w.row({"v", "m", "method", "ks_rho_mean", "ks_rho_half_width", "ks_I_mean", "ks_I_half_width", "replications"});
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    const auto& rep = cell.report;
    auto emit = [&](const char* method, const ConfidenceInterval& rho, const ConfidenceInterval& inh) {
      w.row({format_double(cell.noise), std::to_string(cell.batches), method, format_double(rho.mean),
             format_double(rho.half_width), format_double(inh.mean), format_double(inh.half_width),
             std::to_string(rho.count)});
    };
    emit("auxiliary", rep.ks_rho_auxiliary, rep.ks_inhibitor_auxiliary);
    emit("naive", rep.ks_rho_naive, rep.ks_inhibitor_naive);
  }
  w.close();
}

void write_predictive(const std::filesystem::path& path, const CellResult& cell, int target_t, const json& config) {
  Writer w(path, config);
  w.comment("cell: v=" + format_double(cell.noise) + " m=" + std::to_string(cell.batches));
  const std::string t = std::to_string(target_t);
  w.row({"replication", "sample_index", "rho_" + t, "I_" + t, "source"});
  for (const auto* r : cell.report.successful()) {
    for (const auto* s : {&r->reference, &r->auxiliary.predictive, &r->naive.predictive}) {
      for (Eigen::Index k = 0; k < s->values.rows(); ++k)
        w.row({std::to_string(r->index), std::to_string(k), format_double(s->values(k, 0)),
               format_double(s->values(k, 1)), s->source});
    }
  }
  w.close();
}

json fit_to_json(const AuxiliaryFit& fit) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  auto matrices = [&](const std::vector<Eigen::MatrixXd>& ms) {
    json out = json::array();
    for (const auto& m : ms) out.push_back(matrix(m));
    return out;
  };
  const SummaryStatistics s = flatten(fit);
  json labels = json::array();
  for (std::size_t i = 0; i < s.layout.size(); ++i) labels.push_back(s.layout.label(i));
  return {{"horizon", fit.horizon},       {"state_dims", fit.state_dims}, {"action_dims", fit.action_dims},
          {"mu_x", matrix(fit.mu_x)},     {"mu_a", matrix(fit.mu_a)},     {"psi_x", matrices(fit.psi_x)},
          {"psi_a", matrices(fit.psi_a)}, {"sigma", matrix(fit.sigma)},   {"v_x", matrix(fit.v_x)},
          {"eta_labels", labels},         {"eta", std::vector<double>(s.eta.data(), s.eta.data() + s.eta.size())}};
}

}  // namespace auxabc
