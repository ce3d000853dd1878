#include "marlens/runner.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace marlens;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir.string();
}

ExperimentConfig tiny_iql_config(const char* out_name) {
  ExperimentConfig cfg;
  cfg.scenario_name = "Foraging-8x8-2p-2f-coop-v2";
  cfg.algorithm = Algorithm::IQL;
  cfg.total_steps = 600;
  cfg.n_eval_points = 3;
  cfg.eval_episodes_per_point = 2;
  cfg.seed = 7;
  cfg.out_dir = temp_dir(out_name);
  cfg.hp_overrides = {{"hidden_dim", "8"},  {"net_type", "fc"},       {"batch_size", "4"},
                      {"buffer_capacity", "16"}, {"eps_decay_steps", "300"}};
  return cfg;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

} // namespace

TEST_SUITE("runner") {

TEST_CASE("parse_config_text reads sections, comments, and overrides") {
  const auto cfg = parse_config_text(
      "# experiment definition\n"
      "[experiment]\n"
      "scenario = rware-tiny-2ag-v1   # trailing comment\n"
      "algorithm = mappo\n"
      "param_sharing = false\n"
      "total_steps = 50000\n"
      "n_eval_points = 11\n"
      "eval_episodes_per_point = 5\n"
      "seed = 42\n"
      "\n"
      "[hyperparams]\n"
      "lr = 0.001\n"
      "hidden_dim = 32\n");
  CHECK(cfg.scenario_name == "rware-tiny-2ag-v1");
  CHECK(cfg.algorithm == Algorithm::MAPPO);
  CHECK(!cfg.param_sharing);
  CHECK(cfg.total_steps == 50000);
  CHECK(cfg.n_eval_points == 11);
  CHECK(cfg.eval_episodes_per_point == 5);
  CHECK(cfg.seed == 42);
  CHECK(cfg.hp_overrides.at("lr") == "0.001");

  const HyperParams hp = resolve_hyperparams(cfg);
  CHECK(hp.lr == 0.001);
  CHECK(hp.hidden_dim == 32);
}

TEST_CASE("parse_config_text rejects malformed input") {
  const char* base = "[experiment]\nscenario = rware-tiny-2ag-v1\ntotal_steps = 100\n";
  CHECK_THROWS_AS(parse_config_text("[experiment]\ntotal_steps = 5\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text("[experiment]\nscenario = rware-tiny-2ag-v1\n"),
                  ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "algorithm = dqn\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "mystery = 1\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text("[bogus]\nscenario = x\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text("scenario = rware-tiny-2ag-v1\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text("[experiment\nscenario = x\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "param_sharing = maybe\n"),
                  ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "total_steps = ten\n"), ConfigInvalid);
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "n_eval_points = 1\n"), ConfigInvalid);
  CHECK_THROWS_AS(
      parse_config_text("[experiment]\nscenario = bad-name\ntotal_steps = 100\n"),
      std::exception); // scenario is validated up front
  CHECK_THROWS_AS(
      parse_config_text(std::string(base) + "[hyperparams]\nnet_type = rnn\n"),
      ConfigInvalid); // override values are validated too
  CHECK_THROWS_AS(parse_config_text(std::string(base) + "[hyperparams]\nwidth = 3\n"),
                  ConfigInvalid);
  CHECK_THROWS_AS(parse_config(fs::temp_directory_path() / "marlens_no_such_config.txt"),
                  ConfigInvalid);
}

TEST_CASE("resolve_hyperparams applies the tuned per-setting defaults") {
  ExperimentConfig cfg;
  cfg.total_steps = 1;
  cfg.scenario_name = "Foraging-8x8-2p-2f-coop-v2";
  cfg.algorithm = Algorithm::IQL;
  cfg.param_sharing = true;
  HyperParams hp = resolve_hyperparams(cfg);
  CHECK(hp.hidden_dim == 128);
  CHECK(hp.eps_decay_steps == 2000000);
  CHECK(hp.target.mode == TargetMode::Hard);
  CHECK(hp.net_type == BodyKind::GRU);

  cfg.algorithm = Algorithm::MAPPO;
  hp = resolve_hyperparams(cfg);
  CHECK(hp.net_type == BodyKind::FC);
  CHECK(hp.lr == 3e-4);
  CHECK(hp.n_step == 5);
  CHECK(!hp.reward_standardization);

  cfg.scenario_name = "rware-tiny-2ag-v1";
  cfg.algorithm = Algorithm::QMIX;
  cfg.param_sharing = false;
  hp = resolve_hyperparams(cfg);
  CHECK(hp.net_type == BodyKind::FC);
  CHECK(hp.lr == 3e-4);
  CHECK(hp.target.mode == TargetMode::Soft);

  cfg.hp_overrides["lr"] = "0.25";
  CHECK(resolve_hyperparams(cfg).lr == 0.25);
}

TEST_CASE("render_config round-trips through the parser") {
  ExperimentConfig cfg = tiny_iql_config("marlens_render_rt");
  const std::string text = render_config(cfg);
  const ExperimentConfig back = parse_config_text(text);
  CHECK(back.scenario_name == cfg.scenario_name);
  CHECK(back.algorithm == cfg.algorithm);
  CHECK(back.total_steps == cfg.total_steps);
  CHECK(back.seed == cfg.seed);
  CHECK(back.out_dir == cfg.out_dir);
  // the echo is fully resolved, so re-rendering is a fixed point
  CHECK(render_config(back) == text);
}

TEST_CASE("a tiny run is reproducible byte-for-byte") {
  ExperimentConfig cfg = tiny_iql_config("marlens_run_a");
  const std::string dir_a = run_experiment(cfg);
  cfg.out_dir = temp_dir("marlens_run_b");
  const std::string dir_b = run_experiment(cfg);

  CHECK(slurp(dir_a + "/metrics.jsonl") == slurp(dir_b + "/metrics.jsonl"));
  CHECK(slurp(dir_a + "/checkpoint.bin") == slurp(dir_b + "/checkpoint.bin"));

  // run artifacts and the evaluation grid
  CHECK(fs::exists(dir_a + "/config.txt"));
  const auto events = read_metrics(dir_a);
  std::vector<long> eval_steps;
  for (const auto& e : events)
    if (std::holds_alternative<EvalPoint>(e)) eval_steps.push_back(event_step(e));
  CHECK(eval_steps == std::vector<long>{0, 300, 600});

  // steps are non-decreasing in the file (read_metrics would throw otherwise,
  // but assert the invariant explicitly)
  for (std::size_t i = 1; i < events.size(); ++i)
    REQUIRE(event_step(events[i - 1]) <= event_step(events[i]));

  // checkpoint evaluation is deterministic in its seed
  const auto r1 = evaluate_checkpoint(dir_a + "/checkpoint.bin", 3, 99);
  const auto r2 = evaluate_checkpoint(dir_b + "/checkpoint.bin", 3, 99);
  REQUIRE(r1.size() == 3);
  CHECK(r1 == r2);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("policy-gradient runs honor the evaluation grid too") {
  ExperimentConfig cfg;
  cfg.scenario_name = "Foraging-8x8-2p-2f-coop-v2";
  cfg.algorithm = Algorithm::IA2C;
  cfg.total_steps = 60;
  cfg.n_eval_points = 4;
  cfg.eval_episodes_per_point = 1;
  cfg.seed = 3;
  cfg.out_dir = temp_dir("marlens_run_pg");
  cfg.hp_overrides = {{"hidden_dim", "8"}, {"net_type", "fc"}, {"n_workers", "2"},
                      {"n_step", "5"}};
  const std::string dir = run_experiment(cfg);
  int evals = 0, losses = 0, diags = 0;
  for (const auto& e : read_metrics(dir)) {
    if (std::holds_alternative<EvalPoint>(e)) ++evals;
    else if (std::holds_alternative<TrainLoss>(e)) ++losses;
    else if (std::holds_alternative<DiagnosticsRecord>(e)) ++diags;
  }
  CHECK(evals == 4);
  CHECK(losses == 6); // 60 env steps at 2 workers x 5-step rollouts
  CHECK(diags > 0);
  fs::remove_all(dir);
}

TEST_CASE("export produces one row per evaluation step") {
  ExperimentConfig cfg = tiny_iql_config("marlens_export");
  const std::string dir = run_experiment(cfg);

  const std::string returns = export_plot_data({dir}, "returns");
  CHECK(count_lines(returns) == 1 + cfg.n_eval_points);
  CHECK(returns.rfind("step,mean,ci_lo,ci_hi\n", 0) == 0);

  const std::string ts = export_plot_data({dir}, "taskswitch");
  CHECK(count_lines(ts) == 1 + cfg.n_eval_points);

  // averaging the same run twice collapses the CI onto the mean
  const std::string twice = export_plot_data({dir, dir}, "returns");
  CHECK(count_lines(twice) == 1 + cfg.n_eval_points);

  CHECK(export_plot_data({dir}, "entropy").rfind("step,", 0) == 0);
  CHECK(export_plot_data({dir}, "kl").rfind("step,", 0) == 0);
  const std::string poi = export_plot_data({dir, dir}, "poi");
  CHECK(poi.rfind("algorithm_a,", 0) == 0);

  CHECK_THROWS_AS(export_plot_data({dir}, "speed"), ConfigInvalid);
  CHECK_THROWS_AS(export_plot_data({}, "returns"), ConfigInvalid);

  const std::string report = diagnose_run(dir);
  CHECK(report.find("evaluation points: 3") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("max_threads respects the environment cap") {
  setenv("MARL_LENS_THREADS", "3", 1);
  CHECK(max_threads() == 3);
  setenv("MARL_LENS_THREADS", "0", 1); // invalid: fall back to hardware
  CHECK(max_threads() >= 1);
  unsetenv("MARL_LENS_THREADS");
  CHECK(max_threads() >= 1);
}

} // TEST_SUITE
