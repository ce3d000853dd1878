#include "marlens/runner.hpp"

#include "marlens/checkpoint.hpp"
#include "marlens/env.hpp"
#include "marlens/pg.hpp"
#include "marlens/qlearn.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

namespace marlens {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigInvalid("boolean expected for '" + key + "', got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigInvalid("integer expected for '" + key + "', got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigInvalid("number expected for '" + key + "', got '" + v + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Chunked parallel-for over [0, n); runs inline when one thread
/// suffices.
template <class F>
void parallel_for(int n, int threads, F f) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += threads) f(i);
    });
  for (auto& th : pool) th.join();
}

struct EvalOutcome {
  std::vector<double> team_returns;        // per episode
  std::vector<double> mean_agent_returns;  // per agent
  std::vector<std::vector<int>> action_log; // per agent, across all episodes
};

/// Runs `episodes` evaluation episodes on fresh environments. `Policy`
/// provides make_context() and act(ctx, obs, rng).
template <class Policy>
EvalOutcome evaluate(const Scenario& sc, const Policy& policy, int episodes, Rng& rng) {
  EvalOutcome out;
  for (int ep = 0; ep < episodes; ++ep) {
    Env env(sc, rng.next_u64());
    auto obs = env.reset(rng.next_u64());
    if (out.action_log.empty()) {
      out.action_log.resize(env.n_agents());
      out.mean_agent_returns.assign(env.n_agents(), 0.0);
    }
    auto ctx = policy.make_context();
    double team = 0.0;
    while (!env.done()) {
      auto actions = policy.act(ctx, obs, rng);
      for (int i = 0; i < env.n_agents(); ++i) out.action_log[i].push_back(actions[i]);
      auto js = env.step(actions);
      team += js.team_reward;
      for (int i = 0; i < env.n_agents(); ++i) out.mean_agent_returns[i] += js.rewards[i];
      obs = std::move(js.obs);
    }
    out.team_returns.push_back(team);
  }
  for (auto& r : out.mean_agent_returns) r /= episodes;
  return out;
}

struct QPolicy {
  const QLearner* learner;
  double epsilon;
  QLearner::ActContext make_context() const { return learner->make_context(); }
  std::vector<int> act(QLearner::ActContext& ctx, const std::vector<Eigen::VectorXf>& obs,
                       Rng& rng) const {
    return learner->act(ctx, obs, epsilon, rng);
  }
};

struct PgPolicy {
  const PgLearner* learner;
  PgLearner::ActContext make_context() const { return learner->make_context(); }
  std::vector<int> act(PgLearner::ActContext& ctx, const std::vector<Eigen::VectorXf>& obs,
                       Rng& rng) const {
    return learner->act(ctx, obs, rng);
  }
};

/// Per-agent diagnostics averaged over the updates since the last
/// evaluation point.
class DiagAccumulator {
 public:
  void add(const std::vector<double>& entropy, const std::vector<double>& divergence) {
    if (entropy_.empty()) {
      entropy_.assign(entropy.size(), 0.0);
      divergence_.assign(divergence.size(), 0.0);
    }
    for (std::size_t i = 0; i < entropy.size(); ++i) {
      entropy_[i] += entropy[i];
      divergence_[i] += divergence[i];
    }
    ++count_;
  }

  bool empty() const { return count_ == 0; }

  DiagnosticsRecord flush(long step) {
    DiagnosticsRecord rec;
    rec.step = step;
    rec.entropy = entropy_;
    rec.divergence = divergence_;
    for (auto& e : rec.entropy) e /= count_;
    for (auto& d : rec.divergence) d /= count_;
    rec.mean_entropy = mean_over_agents(rec.entropy);
    rec.mean_divergence = mean_over_agents(rec.divergence);
    entropy_.clear();
    divergence_.clear();
    count_ = 0;
    return rec;
  }

 private:
  std::vector<double> entropy_, divergence_;
  int count_ = 0;
};

std::string default_out_dir(const ExperimentConfig& cfg) {
  return "runs/" + cfg.scenario_name + "-" + algorithm_to_string(cfg.algorithm) +
         (cfg.param_sharing ? "-ps" : "-ns") + "-seed" + std::to_string(cfg.seed);
}

void apply_override(HyperParams& hp, const std::string& key, const std::string& v) {
  if (key == "hidden_dim") hp.hidden_dim = static_cast<int>(parse_long(v, key));
  else if (key == "lr") hp.lr = parse_double(v, key);
  else if (key == "gamma") hp.gamma = parse_double(v, key);
  else if (key == "net_type") {
    if (v == "fc") hp.net_type = BodyKind::FC;
    else if (v == "gru") hp.net_type = BodyKind::GRU;
    else throw ConfigInvalid("net_type must be fc or gru, got '" + v + "'");
  } else if (key == "reward_standardization") hp.reward_standardization = parse_bool(v, key);
  else if (key == "max_grad_norm") hp.max_grad_norm = parse_double(v, key);
  else if (key == "batch_size") hp.batch_size = static_cast<int>(parse_long(v, key));
  else if (key == "buffer_capacity") hp.buffer_capacity = static_cast<int>(parse_long(v, key));
  else if (key == "eps_start") hp.eps_start = parse_double(v, key);
  else if (key == "eps_end") hp.eps_end = parse_double(v, key);
  else if (key == "eps_decay_steps") hp.eps_decay_steps = parse_long(v, key);
  else if (key == "evaluation_epsilon") hp.evaluation_epsilon = parse_double(v, key);
  else if (key == "target_mode") {
    if (v == "hard") hp.target.mode = TargetMode::Hard;
    else if (v == "soft") hp.target.mode = TargetMode::Soft;
    else throw ConfigInvalid("target_mode must be hard or soft, got '" + v + "'");
  } else if (key == "target_interval") hp.target.interval = parse_long(v, key);
  else if (key == "target_tau") hp.target.tau = parse_double(v, key);
  else if (key == "mixing_embed_dim") hp.mixing_embed_dim = static_cast<int>(parse_long(v, key));
  else if (key == "hypernet_dim") hp.hypernet_dim = static_cast<int>(parse_long(v, key));
  else if (key == "hypernet_layers") hp.hypernet_layers = static_cast<int>(parse_long(v, key));
  else if (key == "entropy_coef") hp.entropy_coef = parse_double(v, key);
  else if (key == "n_step") hp.n_step = static_cast<int>(parse_long(v, key));
  else if (key == "ppo_clip") hp.ppo_clip = parse_double(v, key);
  else if (key == "ppo_epochs") hp.ppo_epochs = static_cast<int>(parse_long(v, key));
  else if (key == "n_workers") hp.n_workers = static_cast<int>(parse_long(v, key));
  else throw ConfigInvalid("unknown hyperparameter '" + key + "'");
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  bool have_scenario = false, have_steps = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigInvalid("malformed section header at line " + std::to_string(line_no));
      section = line.substr(1, line.size() - 2);
      if (section != "experiment" && section != "hyperparams")
        throw ConfigInvalid("unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("expected 'key = value' at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == "hyperparams") {
      cfg.hp_overrides[key] = value;
    } else if (section == "experiment") {
      if (key == "scenario") {
        cfg.scenario_name = value;
        have_scenario = true;
      } else if (key == "algorithm") cfg.algorithm = algorithm_from_string(value);
      else if (key == "param_sharing") cfg.param_sharing = parse_bool(value, key);
      else if (key == "total_steps") {
        cfg.total_steps = parse_long(value, key);
        have_steps = true;
      } else if (key == "n_eval_points") cfg.n_eval_points = static_cast<int>(parse_long(value, key));
      else if (key == "eval_episodes_per_point")
        cfg.eval_episodes_per_point = static_cast<int>(parse_long(value, key));
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value, key));
      else if (key == "out_dir") cfg.out_dir = value;
      else throw ConfigInvalid("unknown experiment key '" + key + "'");
    } else {
      throw ConfigInvalid("key before any section at line " + std::to_string(line_no));
    }
  }
  if (!have_scenario) throw ConfigInvalid("missing experiment.scenario");
  if (!have_steps) throw ConfigInvalid("missing experiment.total_steps");
  if (cfg.total_steps <= 0) throw ConfigInvalid("total_steps must be positive");
  if (cfg.n_eval_points < 2) throw ConfigInvalid("n_eval_points must be at least 2");
  if (cfg.eval_episodes_per_point < 1)
    throw ConfigInvalid("eval_episodes_per_point must be at least 1");
  parse_scenario(cfg.scenario_name); // validates early
  resolve_hyperparams(cfg);          // rejects bad override keys/values early
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

HyperParams resolve_hyperparams(const ExperimentConfig& cfg) {
  const Scenario sc = parse_scenario(cfg.scenario_name);
  HyperParams hp = default_hyperparams(cfg.algorithm, cfg.param_sharing, sc.env_kind);
  for (const auto& [key, value] : cfg.hp_overrides) apply_override(hp, key, value);
  return hp;
}

std::string render_config(const ExperimentConfig& cfg) {
  const HyperParams hp = resolve_hyperparams(cfg);
  std::ostringstream os;
  os << "[experiment]\n";
  os << "scenario = " << cfg.scenario_name << "\n";
  os << "algorithm = " << algorithm_to_string(cfg.algorithm) << "\n";
  os << "param_sharing = " << (cfg.param_sharing ? "true" : "false") << "\n";
  os << "total_steps = " << cfg.total_steps << "\n";
  os << "n_eval_points = " << cfg.n_eval_points << "\n";
  os << "eval_episodes_per_point = " << cfg.eval_episodes_per_point << "\n";
  os << "seed = " << cfg.seed << "\n";
  if (!cfg.out_dir.empty()) os << "out_dir = " << cfg.out_dir << "\n";
  os << "\n[hyperparams]\n";
  os << "hidden_dim = " << hp.hidden_dim << "\n";
  os << "lr = " << fmt(hp.lr) << "\n";
  os << "gamma = " << fmt(hp.gamma) << "\n";
  os << "net_type = " << (hp.net_type == BodyKind::FC ? "fc" : "gru") << "\n";
  os << "reward_standardization = " << (hp.reward_standardization ? "true" : "false") << "\n";
  os << "max_grad_norm = " << fmt(hp.max_grad_norm) << "\n";
  os << "batch_size = " << hp.batch_size << "\n";
  os << "buffer_capacity = " << hp.buffer_capacity << "\n";
  os << "eps_start = " << fmt(hp.eps_start) << "\n";
  os << "eps_end = " << fmt(hp.eps_end) << "\n";
  os << "eps_decay_steps = " << hp.eps_decay_steps << "\n";
  os << "evaluation_epsilon = " << fmt(hp.evaluation_epsilon) << "\n";
  os << "target_mode = " << (hp.target.mode == TargetMode::Hard ? "hard" : "soft") << "\n";
  os << "target_interval = " << hp.target.interval << "\n";
  os << "target_tau = " << fmt(hp.target.tau) << "\n";
  os << "mixing_embed_dim = " << hp.mixing_embed_dim << "\n";
  os << "hypernet_dim = " << hp.hypernet_dim << "\n";
  os << "hypernet_layers = " << hp.hypernet_layers << "\n";
  os << "entropy_coef = " << fmt(hp.entropy_coef) << "\n";
  os << "n_step = " << hp.n_step << "\n";
  os << "ppo_clip = " << fmt(hp.ppo_clip) << "\n";
  os << "ppo_epochs = " << hp.ppo_epochs << "\n";
  os << "n_workers = " << hp.n_workers << "\n";
  return os.str();
}

int max_threads() {
  if (const char* env = std::getenv("MARL_LENS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string run_experiment(const ExperimentConfig& cfg) {
  const Scenario sc = parse_scenario(cfg.scenario_name);
  const HyperParams hp = resolve_hyperparams(cfg);
  const std::string dir = cfg.out_dir.empty() ? default_out_dir(cfg) : cfg.out_dir;
  fs::create_directories(dir);

  Env probe(sc, cfg.seed);
  const int n_agents = probe.n_agents();
  const int obs_dim = probe.obs_dim();
  const int n_actions = probe.n_actions();

  Rng master(cfg.seed);
  Rng train_rng = master.split(0);
  Rng eval_rng = master.split(1);
  const std::uint64_t learner_seed = master.next_u64();

  std::vector<MetricsEvent> events;
  DiagAccumulator diag;
  const long interval = cfg.total_steps / (cfg.n_eval_points - 1);
  int next_eval = 0;

  auto emit_eval = [&](auto&& policy) {
    const long step = static_cast<long>(next_eval) * interval;
    EvalOutcome r = evaluate(sc, policy, cfg.eval_episodes_per_point, eval_rng);
    double team = 0.0;
    for (double t : r.team_returns) team += t;
    team /= static_cast<double>(r.team_returns.size());
    events.push_back(EvalPoint{step, r.mean_agent_returns, team});
    events.push_back(TaskSwitchEvent{step, task_switch_profile(r.action_log, n_actions)});
    if (!diag.empty()) events.push_back(diag.flush(step));
    ++next_eval;
  };

  if (is_value_based(cfg.algorithm)) {
    QLearner learner(cfg.algorithm, hp, cfg.param_sharing, n_agents, obs_dim, n_actions,
                     learner_seed);
    QPolicy eval_policy{&learner, hp.evaluation_epsilon};
    EpsilonSchedule sched{hp.eps_start, hp.eps_end, hp.eps_decay_steps};

    Env env(sc, train_rng.next_u64());
    auto obs = env.reset(train_rng.next_u64());
    auto ctx = learner.make_context();
    EpisodeRecord ep;
    ep.obs.push_back(obs);
    long env_steps = 0;

    while (env_steps < cfg.total_steps) {
      while (next_eval < cfg.n_eval_points &&
             env_steps >= static_cast<long>(next_eval) * interval)
        emit_eval(eval_policy);
      const double eps = sched.at(env_steps);
      auto actions = learner.act(ctx, obs, eps, train_rng);
      auto js = env.step(actions);
      ep.actions.push_back(actions);
      ep.team_rewards.push_back(js.team_reward);
      obs = std::move(js.obs);
      ep.obs.push_back(obs);
      ++env_steps;
      if (js.done) {
        learner.store_episode(std::move(ep));
        if (learner.buffer_size() >= hp.batch_size) {
          QTrainResult r = learner.train_step(eps);
          diag.add(r.entropy, r.divergence);
          events.push_back(TrainLoss{env_steps, r.loss, eps});
        }
        obs = env.reset(train_rng.next_u64());
        ctx = learner.make_context();
        ep = EpisodeRecord{};
        ep.obs.push_back(obs);
      }
    }
    while (next_eval < cfg.n_eval_points) emit_eval(eval_policy);
    save_checkpoint(learner.export_params(), dir + "/checkpoint.bin");
  } else {
    PgLearner learner(cfg.algorithm, hp, cfg.param_sharing, n_agents, obs_dim, n_actions,
                      learner_seed);
    PgPolicy eval_policy{&learner};
    const int W = hp.n_workers;
    const int threads = std::min(max_threads(), W);

    std::vector<Env> envs;
    std::vector<std::vector<Eigen::VectorXf>> obs(W);
    std::vector<Rng> wrng;
    envs.reserve(W);
    for (int w = 0; w < W; ++w) {
      envs.emplace_back(sc, train_rng.next_u64());
      obs[w] = envs[w].reset(train_rng.next_u64());
      wrng.push_back(train_rng.split(static_cast<std::uint64_t>(w)));
    }
    long env_steps = 0;

    while (env_steps < cfg.total_steps) {
      while (next_eval < cfg.n_eval_points &&
             env_steps >= static_cast<long>(next_eval) * interval)
        emit_eval(eval_policy);
      learner.begin_rollout();
      std::vector<std::vector<int>> actions(W);
      for (int t = 0; t < hp.n_step; ++t) {
        parallel_for(W, threads,
                     [&](int w) { actions[w] = learner.act_rollout(w, obs[w], wrng[w]); });
        for (int w = 0; w < W; ++w) {
          auto js = envs[w].step(actions[w]);
          learner.record_step(w, js.team_reward, js.done);
          obs[w] = js.done ? envs[w].reset(wrng[w].next_u64()) : std::move(js.obs);
        }
      }
      learner.end_rollout(obs);
      env_steps += static_cast<long>(W) * hp.n_step;
      PgTrainResult r = learner.train_step();
      diag.add(r.agent_entropy, r.agent_divergence);
      events.push_back(TrainLoss{env_steps, r.policy_loss + r.value_loss, 0.0});
    }
    while (next_eval < cfg.n_eval_points) emit_eval(eval_policy);
    save_checkpoint(learner.export_params(), dir + "/checkpoint.bin");
  }

  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return event_step(a) < event_step(b);
  });
  write_metrics(dir, events);

  ExperimentConfig echoed = cfg;
  echoed.out_dir = dir;
  std::ofstream cf(dir + "/config.txt", std::ios::trunc);
  cf << render_config(echoed);
  return dir;
}

std::vector<double> evaluate_checkpoint(const std::string& checkpoint_path, int episodes,
                                        std::uint64_t seed) {
  const fs::path cp(checkpoint_path);
  const fs::path config_path = cp.parent_path() / "config.txt";
  if (!fs::exists(config_path))
    throw ConfigInvalid("no config.txt next to checkpoint: " + config_path.string());
  const ExperimentConfig cfg = parse_config(config_path.string());
  const Scenario sc = parse_scenario(cfg.scenario_name);
  const HyperParams hp = resolve_hyperparams(cfg);

  Env probe(sc, seed);
  const ParamStore<float> params = load_checkpoint(checkpoint_path);
  Rng rng(seed);

  if (is_value_based(cfg.algorithm)) {
    QLearner learner(cfg.algorithm, hp, cfg.param_sharing, probe.n_agents(),
                     probe.obs_dim(), probe.n_actions(), seed);
    learner.import_params(params);
    return evaluate(sc, QPolicy{&learner, hp.evaluation_epsilon}, episodes, rng)
        .team_returns;
  }
  PgLearner learner(cfg.algorithm, hp, cfg.param_sharing, probe.n_agents(),
                    probe.obs_dim(), probe.n_actions(), seed);
  learner.import_params(params);
  return evaluate(sc, PgPolicy{&learner}, episodes, rng).team_returns;
}

namespace {

std::string csv_row(long step, const MeanCi& ci) {
  std::ostringstream os;
  os << step << "," << std::setprecision(10) << ci.mean << "," << ci.lo << "," << ci.hi
     << "\n";
  return os.str();
}

/// step -> per-run values, aggregated with mean_and_ci per step.
std::string export_scalar(const std::vector<std::vector<MetricsEvent>>& runs,
                          const std::function<bool(const MetricsEvent&, double*)>& pick) {
  std::map<long, std::vector<double>> by_step;
  for (const auto& events : runs)
    for (const auto& e : events) {
      double v = 0.0;
      if (pick(e, &v)) by_step[event_step(e)].push_back(v);
    }
  std::string csv = "step,mean,ci_lo,ci_hi\n";
  for (const auto& [step, values] : by_step) csv += csv_row(step, mean_and_ci(values));
  return csv;
}

} // namespace

std::string export_plot_data(const std::vector<std::string>& run_dirs,
                             const std::string& metric) {
  if (run_dirs.empty()) throw ConfigInvalid("no run directories given");
  std::vector<std::vector<MetricsEvent>> runs;
  for (const auto& d : run_dirs) runs.push_back(read_metrics(d));

  if (metric == "returns") {
    return export_scalar(runs, [](const MetricsEvent& e, double* v) {
      if (const auto* p = std::get_if<EvalPoint>(&e)) {
        *v = p->team_return;
        return true;
      }
      return false;
    });
  }
  if (metric == "entropy" || metric == "kl") {
    const bool entropy = metric == "entropy";
    return export_scalar(runs, [entropy](const MetricsEvent& e, double* v) {
      if (const auto* d = std::get_if<DiagnosticsRecord>(&e)) {
        *v = entropy ? d->mean_entropy : d->mean_divergence;
        return true;
      }
      return false;
    });
  }
  if (metric == "taskswitch") {
    // Likelihood per agent and action, averaged across runs per step.
    std::map<long, std::vector<const TaskSwitchProfile*>> by_step;
    for (const auto& events : runs)
      for (const auto& e : events)
        if (const auto* t = std::get_if<TaskSwitchEvent>(&e))
          by_step[t->step].push_back(&t->profile);
    if (by_step.empty()) throw ConfigInvalid("no task-switch events in the given runs");
    const auto& first = *by_step.begin()->second.front();
    const int n_agents = static_cast<int>(first.likelihood.size());
    const int n_actions = static_cast<int>(first.likelihood[0].size());
    std::string csv = "step";
    for (int i = 0; i < n_agents; ++i)
      for (int a = 0; a < n_actions; ++a)
        csv += ",agent" + std::to_string(i) + "_action" + std::to_string(a);
    csv += "\n";
    for (const auto& [step, profiles] : by_step) {
      std::ostringstream os;
      os << step << std::setprecision(10);
      for (int i = 0; i < n_agents; ++i)
        for (int a = 0; a < n_actions; ++a) {
          double mean = 0.0;
          for (const auto* p : profiles) mean += p->likelihood[i][a];
          os << "," << mean / static_cast<double>(profiles.size());
        }
      os << "\n";
      csv += os.str();
    }
    return csv;
  }
  if (metric == "poi") {
    // Pairwise probability of improvement between algorithms, over
    // per-run final scores (mean team return of the last 10 points).
    std::map<std::string, std::vector<double>> scores;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const ExperimentConfig cfg = parse_config(run_dirs[r] + "/config.txt");
      std::vector<double> points;
      for (const auto& e : runs[r])
        if (const auto* p = std::get_if<EvalPoint>(&e)) points.push_back(p->team_return);
      if (points.empty()) throw ConfigInvalid("run has no evaluation points: " + run_dirs[r]);
      const int window = std::min<int>(10, static_cast<int>(points.size()));
      double s = 0.0;
      for (int k = 0; k < window; ++k) s += points[points.size() - 1 - k];
      scores[algorithm_to_string(cfg.algorithm)].push_back(s / window);
    }
    std::string csv = "algorithm_a,algorithm_b,probability_of_improvement\n";
    for (const auto& [a, xa] : scores)
      for (const auto& [b, xb] : scores) {
        if (a == b) continue;
        std::ostringstream os;
        os << a << "," << b << "," << std::setprecision(10)
           << probability_of_improvement(xa, xb) << "\n";
        csv += os.str();
      }
    return csv;
  }
  throw ConfigInvalid("unknown metric '" + metric +
                      "' (expected returns|entropy|kl|taskswitch|poi)");
}

std::string diagnose_run(const std::string& run_dir) {
  const auto events = read_metrics(run_dir);
  std::vector<const EvalPoint*> evals;
  std::vector<const DiagnosticsRecord*> diags;
  const TaskSwitchEvent* last_switch = nullptr;
  int losses = 0;
  for (const auto& e : events) {
    if (const auto* p = std::get_if<EvalPoint>(&e)) evals.push_back(p);
    else if (const auto* d = std::get_if<DiagnosticsRecord>(&e)) diags.push_back(d);
    else if (const auto* t = std::get_if<TaskSwitchEvent>(&e)) last_switch = t;
    else ++losses;
  }
  std::ostringstream os;
  os << std::setprecision(6);
  os << "run: " << run_dir << "\n";
  os << "evaluation points: " << evals.size() << ", updates logged: " << losses << "\n";
  if (!evals.empty())
    os << "team return: first " << evals.front()->team_return << ", last "
       << evals.back()->team_return << "\n";
  if (!diags.empty()) {
    os << "mean policy entropy: first " << diags.front()->mean_entropy << ", last "
       << diags.back()->mean_entropy << "\n";
    os << "mean update divergence: first " << diags.front()->mean_divergence << ", last "
       << diags.back()->mean_divergence << "\n";
    for (std::size_t i = 0; i < diags.back()->entropy.size(); ++i)
      os << "  agent " << i << ": entropy " << diags.back()->entropy[i] << ", divergence "
         << diags.back()->divergence[i] << "\n";
  }
  if (last_switch) {
    os << "final action-usage likelihoods:\n";
    for (std::size_t i = 0; i < last_switch->profile.likelihood.size(); ++i) {
      os << "  agent " << i << ":";
      const auto& lik = last_switch->profile.likelihood[i];
      for (Eigen::Index a = 0; a < lik.size(); ++a) os << " " << lik[a];
      os << "\n";
    }
  }
  return os.str();
}

} // namespace marlens
