#pragma once

#include "marlens/rng.hpp"
#include "marlens/scenario.hpp"

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace marlens {

struct GridTooSmall : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SteppedAfterDone : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum LbfAction : int { LbfNoop = 0, LbfUp = 1, LbfDown = 2, LbfLeft = 3, LbfRight = 4, LbfLoad = 5 };
inline constexpr int kLbfNumActions = 6;

struct LbfAgent {
  int x = 0, y = 0;
  int level = 1;
};
struct LbfFood {
  int x = 0, y = 0;
  int level = 1;
  bool present = true;
};

struct LbfState {
  int grid_w = 0, grid_h = 0;
  std::vector<LbfAgent> agents;
  std::vector<LbfFood> foods;
  int step_count = 0;
  int total_food_level = 0; // episode reward budget
};

struct LbfStepResult {
  std::vector<Eigen::VectorXf> obs;
  std::vector<float> rewards;
  bool done = false;
};

/// Level-Based Foraging grid world. Agents move simultaneously with
/// collision blocking; a food is collected when the levels of its
/// 4-adjacent loading agents sum to at least the food level. Rewards
/// are normalized so a perfect episode returns 1 team-wide.
class LbfEnv {
 public:
  LbfEnv(const Scenario& scenario, std::uint64_t seed, int horizon = 50);

  std::vector<Eigen::VectorXf> reset();
  std::vector<Eigen::VectorXf> reset(std::uint64_t seed);
  LbfStepResult step(const std::vector<int>& joint_action);
  Eigen::VectorXf observe(int agent_index) const;

  int n_agents() const { return scenario_.n_agents; }
  int n_actions() const { return kLbfNumActions; }
  int obs_dim() const { return 3 * (scenario_.n_agents + scenario_.n_food); }
  int horizon() const { return horizon_; }
  bool done() const { return done_; }
  const LbfState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }

  /// Overwrites the live state; used by tests to build exact layouts.
  void set_state(const LbfState& s) { state_ = s; done_ = false; }

  /// One-line structured snapshot for debugging dumps.
  std::string snapshot() const;

 private:
  std::vector<Eigen::VectorXf> observe_all() const;

  Scenario scenario_;
  int horizon_;
  Rng rng_;
  LbfState state_;
  bool done_ = true;
};

} // namespace marlens
