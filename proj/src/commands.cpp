#include "auxabc/commands.hpp"

#include <cstdio>
#include <mutex>

#include "auxabc/io.hpp"
#include "auxabc/lgdbn.hpp"
#include "auxabc/random.hpp"

namespace auxabc {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig resolve_config(const CliOptions& o) {
  ExperimentConfig c = preset(o.preset.value_or("paper"));
  if (o.config) c = load_config(*o.config, std::move(c));
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.output_dir = *o.out;
  if (o.method) c.engine.distance = *o.method;
  if (o.data) c.input = *o.data;
  c.validate();
  return c;
}

namespace {

fs::path input_path(const ExperimentConfig& c) {
  return c.input.empty() ? fs::path(c.output_dir) / "dataset.csv" : fs::path(c.input);
}

json generation_line(const GenerationRecord& g) {
  return {{"generation", g.generation},
          {"tolerance", g.tolerance},
          {"acceptance", g.acceptance},
          {"simulator_calls", g.simulator_calls},
          {"elapsed_s", g.elapsed_seconds}};
}

std::string cell_name(double v, std::size_t m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "v%g_m%zu", v, m);
  return buf;
}

// Shared error policy: configuration problems exit 2, everything else 1.
template <class F>
int guarded(std::ostream& err, F body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: invalid configuration at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_generate(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    const ErythroblastModel model(c.model.setup);
    const Dataset data = generate_dataset(model, c.model.truth(), c.model.batches, 1,
                                          derive_key(c.seed, {static_cast<std::uint64_t>(StreamTag::observed)}));
    fs::create_directories(c.output_dir);
    const fs::path path = fs::path(c.output_dir) / "dataset.csv";
    write_dataset(path, data, to_json(c));
    out << "wrote " << data.size() << " trajectories to " << path.string() << "\n";
    return 0;
  });
}

int cmd_infer(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    const fs::path in = input_path(c);
    const Dataset observed = read_dataset(in);
    if (observed.horizon() != c.model.setup.horizon)
      throw ConfigError("/model/horizon", "dataset " + in.string() + " has horizon " +
                                              std::to_string(observed.horizon()));
    const ErythroblastModel model(c.model.setup);
    const auto discrepancy = make_discrepancy(c.engine.distance, observed, c.engine.standardization);
    const std::string method(to_string(c.engine.distance));

    ProgressCallback progress;
    if (!options.quiet)
      progress = [&](const GenerationRecord& g) {
        json line = generation_line(g);
        line["method"] = method;
        err << line.dump() << "\n" << std::flush;
      };
    const PosteriorApproximation post =
        run_abc_smc(c.make_prior(), model, *discrepancy, observed.size(), c.smc(), progress);

    fs::create_directories(c.output_dir);
    const json echo = to_json(c);
    write_posterior(fs::path(c.output_dir) / ("posterior_" + method + ".csv"), post, echo);
    write_history(fs::path(c.output_dir) / ("history_" + method + ".csv"), post, echo);

    json summary{{"method", method},
                 {"generations", post.history.size()},
                 {"final_tolerance", post.population.tolerance},
                 {"simulator_calls", post.simulator_calls},
                 {"elapsed_s", post.elapsed_seconds},
                 {"hit_generation_cap", post.hit_generation_cap}};
    for (const auto& name : ErythroblastModel::names())
      summary["posterior"][name] = {{"mean", post.mean(name)}, {"std", post.stddev(name)}};
    out << summary.dump() << "\n";
    return 0;
  });
}

int cmd_experiment(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    fs::create_directories(c.output_dir);
    const json echo = to_json(c);
    std::mutex log_mutex;

    std::vector<CellResult> cells;
    for (double v : c.experiment.noise) {
      for (std::size_t m : c.experiment.batches) {
        CellResult cell;
        cell.noise = v;
        cell.batches = m;
        MacroReplicationConfig mc = c.cell(v, m);
        if (!options.quiet)
          mc.progress = [&, v, m](std::size_t r, DistanceKind kind, const GenerationRecord& g) {
            json line = generation_line(g);
            line["v"] = v;
            line["m"] = m;
            line["replication"] = r;
            line["method"] = std::string(to_string(kind));
            std::lock_guard lock(log_mutex);
            err << line.dump() << "\n" << std::flush;
          };
        try {
          cell.report = run_macro_replications(mc);
          cell.ok = true;
          write_predictive(fs::path(c.output_dir) / ("predictive_" + cell_name(v, m) + ".csv"), cell,
                           c.experiment.target_t, echo);
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
        if (!options.quiet) {
          json line{{"cell", cell_name(v, m)}, {"ok", cell.ok}};
          if (!cell.ok) line["error"] = cell.error;
          for (const auto& w : cell.report.warnings) line["warnings"].push_back(w);
          std::lock_guard lock(log_mutex);
          err << line.dump() << "\n" << std::flush;
        }
        cells.push_back(std::move(cell));
      }
    }

    const fs::path dir(c.output_dir);
    write_replications(dir / "replications.csv", cells, echo);
    write_ratio_table(dir / "ratio_table.csv", cells, echo);
    write_ks_table(dir / "ks_table.csv", cells, echo);

    std::size_t failed = 0;
    for (const auto& cell : cells) {
      const auto& r = cell.report;
      if (!cell.ok) {
        ++failed;
        out << cell_name(cell.noise, cell.batches) << ": FAILED " << cell.error << "\n";
        continue;
      }
      char line[256];
      std::snprintf(line, sizeof line,
                    "%s: ratio %.3f +- %.3f | K-S rho aux %.3f naive %.3f | K-S I aux %.3f naive %.3f | R=%zu\n",
                    cell_name(cell.noise, cell.batches).c_str(), r.ratio.mean, r.ratio.half_width,
                    r.ks_rho_auxiliary.mean, r.ks_rho_naive.mean, r.ks_inhibitor_auxiliary.mean,
                    r.ks_inhibitor_naive.mean, r.ratio.count);
      out << line;
    }
    out << cells.size() - failed << " of " << cells.size() << " cells completed; results in " << dir.string()
        << "\n";
    return failed ? 1 : 0;
  });
}

int cmd_validate_config(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << to_json(resolve_config(options)).dump(2) << "\n";
    return 0;
  });
}

int cmd_fit(const CliOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig c = resolve_config(options);
    out << fit_to_json(fit_mle(read_dataset(input_path(c)))).dump(2) << "\n";
    return 0;
  });
}

}  // namespace auxabc
