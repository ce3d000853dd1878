#pragma once

#include "marlens/config.hpp"
#include "marlens/diagnostics.hpp"
#include "marlens/net.hpp"
#include "marlens/pg_ops.hpp"
#include "marlens/qlearn_ops.hpp" // RewardStandardizer

#include <memory>
#include <vector>

namespace marlens {

struct StaleRollout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PgTrainResult {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy_bonus = 0.0;
  std::vector<double> agent_entropy;    // per agent, batch mean, post-update
  std::vector<double> agent_divergence; // per agent, KL(post || pre)
};

/// On-policy learners: IA2C/IPPO (independent critics) and
/// MAA2C/MAPPO (one critic over the joint observation). The learner
/// owns one rollout slot per parallel worker; the caller steps the
/// environments and feeds transitions in, then calls train_step()
/// once per collected rollout.
class PgLearner {
 public:
  PgLearner(Algorithm alg, const HyperParams& hp, bool param_sharing, int n_agents,
            int obs_dim, int n_actions, std::uint64_t seed);

  /// Recurrent acting context for evaluation episodes.
  struct ActContext {
    std::vector<Eigen::MatrixXf> hidden; // per agent, 1 x hidden_dim
  };
  ActContext make_context() const;

  /// Samples actions from the softmax policy (argmax when greedy).
  std::vector<int> act(ActContext& ctx, const std::vector<Eigen::VectorXf>& obs, Rng& rng,
                       bool greedy = false) const;

  /// Actor logits for one agent; advances the context.
  Eigen::VectorXd logits(ActContext& ctx, int agent, const Eigen::VectorXf& obs) const;

  // --- rollout collection ---
  void begin_rollout();
  /// Safe to call concurrently for distinct workers.
  std::vector<int> act_rollout(int worker, const std::vector<Eigen::VectorXf>& obs,
                               Rng& rng);
  void record_step(int worker, float team_reward, bool done);
  void end_rollout(const std::vector<std::vector<Eigen::VectorXf>>& final_obs);

  /// One update on the collected rollout (PPO iterates ppo_epochs
  /// over it internally); flushes the rollout. Throws StaleRollout if
  /// the rollout was already consumed.
  PgTrainResult train_step();

  long learner_steps() const { return learner_steps_; }
  int n_workers() const { return hp_.n_workers; }
  int n_step() const { return hp_.n_step; }
  const HyperParams& hp() const { return hp_; }

  ParamStore<float> export_params() const;
  void import_params(const ParamStore<float>& merged);

 private:
  struct WorkerSlot {
    std::vector<Eigen::MatrixXf> hidden;       // live actor hidden, per agent
    std::vector<Eigen::MatrixXf> start_hidden; // at rollout start
    std::vector<std::vector<Eigen::VectorXf>> obs;    // per step, per agent
    std::vector<std::vector<int>> actions;            // per step
    std::vector<std::vector<float>> old_logp;         // per step, per agent
    std::vector<float> rewards;
    std::vector<bool> dones;
    std::vector<Eigen::VectorXf> final_obs;
  };

  Eigen::VectorXf actor_input(int agent, const Eigen::VectorXf& obs) const;
  Eigen::VectorXf critic_in(int agent, const std::vector<Eigen::VectorXf>& obs) const;
  int store_index(int agent) const { return param_sharing_ ? 0 : agent; }
  bool is_ppo() const { return alg_ == Algorithm::IPPO || alg_ == Algorithm::MAPPO; }

  Algorithm alg_;
  HyperParams hp_;
  bool param_sharing_;
  bool centralized_critic_;
  int n_agents_, obs_dim_, n_actions_, actor_input_dim_, critic_input_dim_;

  std::vector<ParamStore<float>> actor_stores_;
  std::vector<Network<float>> actor_nets_;
  std::vector<Adam<float>> actor_optims_;
  std::vector<ParamStore<float>> critic_stores_;
  std::vector<ParamStore<float>> critic_targets_;
  std::vector<Network<float>> critic_nets_;
  std::vector<Adam<float>> critic_optims_;

  std::vector<WorkerSlot> workers_;
  bool rollout_open_ = false;
  bool rollout_ready_ = false;

  RewardStandardizer reward_std_;
  Rng rng_;
  long learner_steps_ = 0;
};

} // namespace marlens
