#include "mcr2/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* sub, mcr2::cli::CommonOptions& opts, std::string& config) {
  sub->add_option("--config", config, "JSON config file");
  sub->add_option("--out", opts.out, "Output directory");
  sub->add_option("--seed", opts.seed, "Seed (overrides the config seed)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mcr2::cli;
  CLI::App app{"Rate-reduction experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string log_base;
  app.add_option("--log-base", log_base, "Logarithm base for rates")
      ->check(CLI::IsMember({"bits", "nats"}));

  CommonOptions opts;
  VerifyOptions vopts;
  std::string config;

  auto* simulate = app.add_subcommand("simulate", "Evaluate rates on synthetic mixtures");
  auto* verify = app.add_subcommand("verify", "Run seeded property sweeps");
  auto* optimize = app.add_subcommand("optimize", "Optimize free features on the constraint set");
  auto* train = app.add_subcommand("train", "Train a feature map");
  auto* eval = app.add_subcommand("eval", "Score predicted labels against ground truth");
  for (auto* sub : {simulate, verify, optimize, train, eval}) {
    add_common(sub, opts, config);
    sub->fallthrough();
  }
  verify->add_option("--suite", vopts.suite, "lemmas, theorem, gradients, metrics or all");
  verify->add_option("--trials", vopts.trials, "Random instances per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!config.empty()) opts.config = config;
  if (!log_base.empty()) opts.log_base = mcr2::parse_log_base(log_base);

  if (simulate->parsed()) return run_simulate(opts, std::cout);
  if (verify->parsed()) return run_verify(opts, vopts, std::cout);
  if (optimize->parsed()) return run_optimize(opts, std::cout);
  if (train->parsed()) return run_train(opts, std::cout);
  return run_eval(opts, std::cout);
}
