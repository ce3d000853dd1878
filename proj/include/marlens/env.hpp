#pragma once

#include "marlens/env_lbf.hpp"
#include "marlens/env_rware.hpp"

#include <optional>

namespace marlens {

struct JointStep {
  std::vector<Eigen::VectorXf> obs;
  std::vector<float> rewards;
  float team_reward = 0.0f;
  bool done = false;
};

/// Uniform front over both grid worlds. LBF pays individual rewards
/// that sum to the team contribution; RWARE duplicates a shared
/// scalar, so the team reward is the first entry there.
class Env {
 public:
  Env(const Scenario& scenario, std::uint64_t seed, int horizon_override = 0)
      : kind_(scenario.env_kind) {
    if (kind_ == EnvKind::LBF)
      lbf_.emplace(scenario, seed, horizon_override > 0 ? horizon_override : 50);
    else
      rware_.emplace(scenario, seed, horizon_override > 0 ? horizon_override : 500);
  }

  std::vector<Eigen::VectorXf> reset(std::uint64_t seed) {
    return lbf_ ? lbf_->reset(seed) : rware_->reset(seed);
  }
  std::vector<Eigen::VectorXf> reset() { return lbf_ ? lbf_->reset() : rware_->reset(); }

  JointStep step(const std::vector<int>& actions) {
    JointStep js;
    if (lbf_) {
      auto r = lbf_->step(actions);
      js.obs = std::move(r.obs);
      js.rewards = std::move(r.rewards);
      js.done = r.done;
      for (float rw : js.rewards) js.team_reward += rw;
    } else {
      auto r = rware_->step(actions);
      js.obs = std::move(r.obs);
      js.rewards = std::move(r.rewards);
      js.done = r.done;
      js.team_reward = js.rewards.empty() ? 0.0f : js.rewards[0];
    }
    return js;
  }

  EnvKind kind() const { return kind_; }
  int n_agents() const { return lbf_ ? lbf_->n_agents() : rware_->n_agents(); }
  int n_actions() const { return lbf_ ? lbf_->n_actions() : rware_->n_actions(); }
  int obs_dim() const { return lbf_ ? lbf_->obs_dim() : rware_->obs_dim(); }
  int horizon() const { return lbf_ ? lbf_->horizon() : rware_->horizon(); }
  bool done() const { return lbf_ ? lbf_->done() : rware_->done(); }
  std::string snapshot() const { return lbf_ ? lbf_->snapshot() : rware_->snapshot(); }

 private:
  EnvKind kind_;
  std::optional<LbfEnv> lbf_;
  std::optional<RwareEnv> rware_;
};

} // namespace marlens
