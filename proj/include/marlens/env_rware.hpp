#pragma once

#include "marlens/env_lbf.hpp" // shared error types
#include "marlens/rng.hpp"
#include "marlens/scenario.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace marlens {

enum RwareAction : int {
  RwNoop = 0,
  RwForward = 1,
  RwTurnLeft = 2,
  RwTurnRight = 3,
  RwToggleLoad = 4
};
inline constexpr int kRwareNumActions = 5;

enum class Heading : int { N = 0, E = 1, S = 2, W = 3 };
enum class CellKind : std::uint8_t { Empty = 0, ShelfRack = 1, Goal = 2 };

struct RwareAgent {
  int x = 0, y = 0;
  Heading heading = Heading::N;
  std::optional<int> carrying; // shelf id
};

struct RwareShelf {
  int home_x = 0, home_y = 0;
  int x = 0, y = 0; // current position (follows the carrier)
  bool requested = false;
};

struct RwareState {
  int grid_w = 0, grid_h = 0;
  std::vector<CellKind> layout; // row-major, grid_w * grid_h
  std::vector<RwareAgent> agents;
  std::vector<RwareShelf> shelves;
  int step_count = 0;
};

struct RwareStepResult {
  std::vector<Eigen::VectorXf> obs;
  std::vector<float> rewards;
  bool done = false;
};

/// Multi-Robot Warehouse grid world. Rotating robots carry requested
/// shelves to the goal cells on the bottom edge; the team is rewarded
/// +1 per delivery and the request queue is refilled so it always
/// holds exactly n_agents shelves.
class RwareEnv {
 public:
  RwareEnv(const Scenario& scenario, std::uint64_t seed, int horizon = 500);

  std::vector<Eigen::VectorXf> reset();
  std::vector<Eigen::VectorXf> reset(std::uint64_t seed);
  RwareStepResult step(const std::vector<int>& joint_action);
  Eigen::VectorXf observe(int agent_index) const;

  int n_agents() const { return scenario_.n_agents; }
  int n_actions() const { return kRwareNumActions; }
  // 9 window cells x (wall, agent, heading one-hot, shelf, requested)
  // plus self carrying flag and heading one-hot.
  int obs_dim() const { return 9 * 8 + 5; }
  int horizon() const { return horizon_; }
  bool done() const { return done_; }
  const RwareState& state() const { return state_; }
  const Scenario& scenario() const { return scenario_; }
  int n_requested() const;

  void set_state(const RwareState& s) { state_ = s; done_ = false; }

  std::string snapshot() const;

  /// Rack layout generator, exposed for tests: racks in paired
  /// columns separated by corridors, goals centered on the bottom edge.
  static std::vector<CellKind> make_layout(int grid_w, int grid_h);

 private:
  std::vector<Eigen::VectorXf> observe_all() const;
  CellKind cell(int x, int y) const { return state_.layout[y * state_.grid_w + x]; }

  Scenario scenario_;
  int horizon_;
  Rng rng_;
  RwareState state_;
  bool done_ = true;
};

} // namespace marlens
