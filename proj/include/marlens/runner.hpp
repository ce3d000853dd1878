#pragma once

#include "marlens/config.hpp"
#include "marlens/eval_stats.hpp"
#include "marlens/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace marlens {

/// One training run, resolved from a config file. Hyperparameter
/// defaults come from the tuned per-(algorithm, sharing, env family)
/// tables; entries in hp_overrides win.
struct ExperimentConfig {
  std::string scenario_name;
  Algorithm algorithm = Algorithm::IQL;
  bool param_sharing = true;
  long total_steps = 0;
  int n_eval_points = 201;
  int eval_episodes_per_point = 10;
  std::uint64_t seed = 1;
  std::string out_dir; // run directory; derived from the config when empty
  std::map<std::string, std::string> hp_overrides;
};

/// Line-oriented `key = value` text with [experiment] and
/// [hyperparams] sections; '#' starts a comment. Throws ConfigInvalid.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

HyperParams resolve_hyperparams(const ExperimentConfig& cfg);

/// Echo of the fully resolved configuration, written into the run
/// directory so a checkpoint can be re-instantiated later.
std::string render_config(const ExperimentConfig& cfg);

/// Trains per the config, evaluating at n_eval_points evenly spaced
/// step counts (including step 0), and returns the run directory
/// containing config.txt, metrics.jsonl, and checkpoint.bin. Fully
/// deterministic in (config, seed).
std::string run_experiment(const ExperimentConfig& cfg);

/// Greedy-free evaluation of a saved checkpoint (the run's config.txt
/// must sit next to it). Returns per-episode team returns.
std::vector<double> evaluate_checkpoint(const std::string& checkpoint_path, int episodes,
                                        std::uint64_t seed = 12345);

/// CSV export for plotting; `metric` is one of returns, entropy, kl,
/// taskswitch, poi.
std::string export_plot_data(const std::vector<std::string>& run_dirs,
                             const std::string& metric);

/// Human-readable diagnostics summary of one run.
std::string diagnose_run(const std::string& run_dir);

/// Worker-thread cap: MARL_LENS_THREADS if set, else hardware
/// concurrency.
int max_threads();

} // namespace marlens
