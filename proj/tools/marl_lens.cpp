#include "marlens/eval_stats.hpp"
#include "marlens/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"marl-lens: cooperative multi-agent RL workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto* run = app.add_subcommand("run", "train per a config file");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
    seed_given = true;
  });

  std::string checkpoint_path;
  int episodes = 10;
  auto* eval = app.add_subcommand("eval", "evaluate a saved checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "number of evaluation episodes");

  std::string run_dir;
  auto* diagnose = app.add_subcommand("diagnose", "summarize a run's diagnostics");
  diagnose->add_option("--run", run_dir, "run directory")->required();

  std::vector<std::string> run_dirs;
  std::string metric;
  auto* exp = app.add_subcommand("export", "export plot-ready CSV");
  exp->add_option("--runs", run_dirs, "run directories")->required();
  exp->add_option("--metric", metric, "returns|entropy|kl|taskswitch|poi")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      marlens::ExperimentConfig cfg = marlens::parse_config(config_path);
      if (seed_given) cfg.seed = seed;
      const std::string dir = marlens::run_experiment(cfg);
      std::cout << dir << "\n";
    } else if (*eval) {
      const auto returns = marlens::evaluate_checkpoint(checkpoint_path, episodes);
      const auto ci = marlens::mean_and_ci(returns);
      std::cout << "episodes: " << returns.size() << "\n"
                << "mean team return: " << ci.mean << " (95% CI [" << ci.lo << ", "
                << ci.hi << "])\n";
    } else if (*diagnose) {
      std::cout << marlens::diagnose_run(run_dir);
    } else if (*exp) {
      std::cout << marlens::export_plot_data(run_dirs, metric);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
