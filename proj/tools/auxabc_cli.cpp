#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "auxabc/commands.hpp"

using namespace auxabc;

namespace {

// Flags shared by every subcommand; presence is tracked so that only
// explicitly given flags override the config file.
void add_common(CLI::App* cmd, CliOptions& o, std::string& method) {
  cmd->add_option_function<std::string>("--config", [&o](const std::string& p) { o.config = p; },
                                        "JSON configuration file (comments allowed)")
      ->check(CLI::ExistingFile);
  cmd->add_option_function<std::string>("--preset", [&o](const std::string& p) { o.preset = p; },
                                        "base settings before --config is applied")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option_function<std::uint64_t>("--seed", [&o](std::uint64_t s) { o.seed = s; }, "master seed");
  cmd->add_option_function<std::size_t>("--workers", [&o](std::size_t n) { o.workers = n; },
                                        "worker threads (0: all hardware threads)");
  cmd->add_option_function<std::string>("--out", [&o](const std::string& p) { o.out = p; }, "output directory");
  cmd->add_option("--method", method, "distance used by infer")->check(CLI::IsMember({"auxiliary", "naive"}));
  cmd->add_option_function<std::string>("--data", [&o](const std::string& p) { o.data = p; },
                                        "dataset file read by infer and fit (default <out>/dataset.csv)");
  cmd->add_flag("-q,--quiet", o.quiet, "suppress per-generation progress lines");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auxiliary-likelihood ABC-SMC for the erythroblast growth model"};
  app.set_version_flag("--version", std::string("auxabc ") + kVersion);
  app.require_subcommand(1);

  CliOptions options;
  std::string method;

  auto* generate = app.add_subcommand("generate", "simulate an observed dataset from the true parameters");
  auto* infer = app.add_subcommand("infer", "run one ABC-SMC inference on a dataset");
  auto* experiment = app.add_subcommand("experiment", "run the (v, m) macro-replication grid");
  auto* validate = app.add_subcommand("validate-config", "print the effective configuration");
  auto* fit = app.add_subcommand("fit", "print the auxiliary fit of a dataset (debugging)");
  for (auto* cmd : {generate, infer, experiment, validate, fit}) add_common(cmd, options, method);

  CLI11_PARSE(app, argc, argv);
  if (!method.empty()) options.method = parse_distance_kind(method);

  if (generate->parsed()) return cmd_generate(options, std::cout, std::cerr);
  if (infer->parsed()) return cmd_infer(options, std::cout, std::cerr);
  if (experiment->parsed()) return cmd_experiment(options, std::cout, std::cerr);
  if (validate->parsed()) return cmd_validate_config(options, std::cout, std::cerr);
  return cmd_fit(options, std::cout, std::cerr);
}
