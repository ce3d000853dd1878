#pragma once

#include "marlens/config.hpp"
#include "marlens/diagnostics.hpp"
#include "marlens/net.hpp"
#include "marlens/qlearn_ops.hpp"

#include <deque>
#include <memory>

namespace marlens {

struct BufferUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One whole episode. obs has T+1 entries (the terminal observation
/// included); actions and team_rewards have T.
struct EpisodeRecord {
  std::vector<std::vector<Eigen::VectorXf>> obs;
  std::vector<std::vector<int>> actions;
  std::vector<float> team_rewards;

  int length() const { return static_cast<int>(actions.size()); }
};

/// Ring buffer of whole episodes; sampling is uniform without
/// replacement within a batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : capacity_(capacity) {}

  void insert(EpisodeRecord ep) {
    episodes_.push_back(std::move(ep));
    if (static_cast<int>(episodes_.size()) > capacity_) episodes_.pop_front();
  }

  std::vector<const EpisodeRecord*> sample(int batch, Rng& rng) const {
    if (static_cast<int>(episodes_.size()) < batch)
      throw BufferUnderflow("replay holds " + std::to_string(episodes_.size()) +
                            " episodes, need " + std::to_string(batch));
    std::vector<int> ids(episodes_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    std::vector<const EpisodeRecord*> out;
    for (int k = 0; k < batch; ++k) {
      const int j = rng.uniform_int(static_cast<int>(ids.size()));
      out.push_back(&episodes_[ids[j]]);
      ids[j] = ids.back();
      ids.pop_back();
    }
    return out;
  }

  int size() const { return static_cast<int>(episodes_.size()); }
  int capacity() const { return capacity_; }
  const EpisodeRecord& at(int i) const { return episodes_[i]; }

 private:
  int capacity_;
  std::deque<EpisodeRecord> episodes_;
};

struct QTrainResult {
  double loss = 0.0;
  std::vector<double> entropy;    // per agent, batch mean, post-update policy
  std::vector<double> divergence; // per agent, KL(post || pre)
};

/// Off-policy value learners: IQL (independent TD), VDN (additive
/// mixing), QMIX (monotonic hypernetwork mixing). Parameter sharing
/// appends a one-hot agent ID to observations.
class QLearner {
 public:
  QLearner(Algorithm alg, const HyperParams& hp, bool param_sharing, int n_agents,
           int obs_dim, int n_actions, std::uint64_t seed);

  /// Per-agent recurrent context for acting/evaluation.
  struct ActContext {
    std::vector<Eigen::MatrixXf> hidden; // per agent, 1 x hidden_dim
  };
  ActContext make_context() const;

  std::vector<int> act(ActContext& ctx, const std::vector<Eigen::VectorXf>& obs,
                       double epsilon, Rng& rng) const;

  /// Q row for one agent; advances the context hidden state.
  Eigen::VectorXd q_values(ActContext& ctx, int agent,
                           const Eigen::VectorXf& obs) const;

  void store_episode(EpisodeRecord ep);
  int buffer_size() const { return buffer_.size(); }

  /// One optimization step on a sampled batch. `policy_epsilon` sets
  /// the exploration rate of the epsilon-greedy policy the diagnostics
  /// are computed on (the behavior policy); negative means the
  /// evaluation epsilon.
  QTrainResult train_step(double policy_epsilon = -1.0);

  long learner_steps() const { return learner_steps_; }
  const HyperParams& hp() const { return hp_; }
  int n_agents() const { return n_agents_; }
  int n_actions() const { return n_actions_; }

  ParamStore<float> export_params() const;
  void import_params(const ParamStore<float>& merged);

 private:
  Eigen::VectorXf make_input(int agent, const Eigen::VectorXf& obs) const;
  int store_index(int agent) const { return param_sharing_ ? 0 : agent; }

  Algorithm alg_;
  HyperParams hp_;
  bool param_sharing_;
  int n_agents_, obs_dim_, n_actions_, input_dim_;

  std::vector<ParamStore<float>> stores_;
  std::vector<ParamStore<float>> targets_;
  std::vector<Network<float>> nets_; // one per store, prefix "agent<i>"
  std::vector<Adam<float>> optims_;

  ParamStore<float> mixer_;
  ParamStore<float> mixer_target_;
  std::unique_ptr<Adam<float>> mixer_optim_;
  QmixDims qdims_;

  ReplayBuffer buffer_;
  RewardStandardizer reward_std_;
  Rng rng_;
  long learner_steps_ = 0;
};

} // namespace marlens
