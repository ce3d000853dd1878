#include "marlens/env_lbf.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>

namespace marlens {

namespace {

constexpr int kDx[] = {0, 0, 0, -1, 1, 0}; // Noop, Up, Down, Left, Right, Load
constexpr int kDy[] = {0, -1, 1, 0, 0, 0};

int chebyshev(int dx, int dy) { return std::max(std::abs(dx), std::abs(dy)); }

} // namespace

LbfEnv::LbfEnv(const Scenario& scenario, std::uint64_t seed, int horizon)
    : scenario_(scenario), horizon_(horizon), rng_(seed) {
  if (scenario.env_kind != EnvKind::LBF)
    throw std::invalid_argument("LbfEnv requires an LBF scenario");
  reset();
}

std::vector<Eigen::VectorXf> LbfEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  return reset();
}

std::vector<Eigen::VectorXf> LbfEnv::reset() {
  const int n_cells = scenario_.grid_w * scenario_.grid_h;
  const int n_entities = scenario_.n_agents + scenario_.n_food;
  if (n_entities > n_cells)
    throw GridTooSmall("cannot place " + std::to_string(n_entities) + " entities on " +
                       std::to_string(n_cells) + " cells");

  state_ = LbfState{};
  state_.grid_w = scenario_.grid_w;
  state_.grid_h = scenario_.grid_h;

  std::vector<int> free_cells(n_cells);
  for (int i = 0; i < n_cells; ++i) free_cells[i] = i;
  auto take_cell = [&]() {
    const int k = rng_.uniform_int(static_cast<int>(free_cells.size()));
    const int cell = free_cells[k];
    free_cells[k] = free_cells.back();
    free_cells.pop_back();
    return cell;
  };

  int level_sum = 0;
  for (int i = 0; i < scenario_.n_agents; ++i) {
    const int cell = take_cell();
    LbfAgent a;
    a.x = cell % state_.grid_w;
    a.y = cell / state_.grid_w;
    a.level = rng_.uniform_range(1, 3);
    level_sum += a.level;
    state_.agents.push_back(a);
  }
  for (int i = 0; i < scenario_.n_food; ++i) {
    const int cell = take_cell();
    LbfFood f;
    f.x = cell % state_.grid_w;
    f.y = cell / state_.grid_w;
    f.level = scenario_.coop ? level_sum : rng_.uniform_range(1, level_sum);
    state_.foods.push_back(f);
    state_.total_food_level += f.level;
  }
  done_ = false;
  return observe_all();
}

LbfStepResult LbfEnv::step(const std::vector<int>& joint_action) {
  if (done_) throw SteppedAfterDone("LBF episode is over");
  if (static_cast<int>(joint_action.size()) != scenario_.n_agents)
    throw InvalidAction("expected one action per agent");
  for (int a : joint_action)
    if (a < 0 || a >= kLbfNumActions)
      throw InvalidAction("LBF action out of range: " + std::to_string(a));

  const int n = scenario_.n_agents;

  // Simultaneous movement with blocking: contested targets, swaps and
  // moves into non-moving entities all cancel; cancellations cascade.
  std::vector<int> tx(n), ty(n);
  std::vector<bool> moving(n, false);
  for (int i = 0; i < n; ++i) {
    const int a = joint_action[i];
    tx[i] = state_.agents[i].x + kDx[a];
    ty[i] = state_.agents[i].y + kDy[a];
    moving[i] = (a >= LbfUp && a <= LbfRight);
    if (moving[i]) {
      if (tx[i] < 0 || tx[i] >= state_.grid_w || ty[i] < 0 || ty[i] >= state_.grid_h)
        moving[i] = false;
      for (const auto& f : state_.foods)
        if (f.present && f.x == tx[i] && f.y == ty[i]) moving[i] = false;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!moving[i]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!moving[j]) continue;
      const bool same_target = tx[i] == tx[j] && ty[i] == ty[j];
      const bool swap = tx[i] == state_.agents[j].x && ty[i] == state_.agents[j].y &&
                        tx[j] == state_.agents[i].x && ty[j] == state_.agents[i].y;
      if (same_target || swap) moving[i] = moving[j] = false;
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!moving[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i || moving[j]) continue;
        if (tx[i] == state_.agents[j].x && ty[i] == state_.agents[j].y) {
          moving[i] = false;
          changed = true;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (moving[i]) {
      state_.agents[i].x = tx[i];
      state_.agents[i].y = ty[i];
    }
  }

  // Loading: each present food checks its 4-adjacent loaders.
  LbfStepResult result;
  result.rewards.assign(n, 0.0f);
  for (auto& f : state_.foods) {
    if (!f.present) continue;
    std::vector<int> loaders;
    int loader_levels = 0;
    for (int i = 0; i < n; ++i) {
      if (joint_action[i] != LbfLoad) continue;
      if (std::abs(state_.agents[i].x - f.x) + std::abs(state_.agents[i].y - f.y) == 1) {
        loaders.push_back(i);
        loader_levels += state_.agents[i].level;
      }
    }
    if (!loaders.empty() && loader_levels >= f.level) {
      f.present = false;
      for (int i : loaders)
        result.rewards[i] += static_cast<float>(f.level) * state_.agents[i].level /
                             (static_cast<float>(loader_levels) * state_.total_food_level);
    }
  }

  ++state_.step_count;
  const bool all_gone = std::none_of(state_.foods.begin(), state_.foods.end(),
                                     [](const LbfFood& f) { return f.present; });
  done_ = all_gone || state_.step_count >= horizon_;
  result.done = done_;
  result.obs = observe_all();
  return result;
}

Eigen::VectorXf LbfEnv::observe(int agent_index) const {
  const auto& self = state_.agents[agent_index];
  Eigen::VectorXf obs = Eigen::VectorXf::Zero(obs_dim());
  const int sight = scenario_.sight ? *scenario_.sight
                                    : std::max(state_.grid_w, state_.grid_h);
  int slot = 0;
  auto emit = [&](int dx, int dy, int level, bool visible) {
    if (visible && chebyshev(dx, dy) <= sight) {
      obs[3 * slot + 0] = static_cast<float>(dx);
      obs[3 * slot + 1] = static_cast<float>(dy);
      obs[3 * slot + 2] = static_cast<float>(level);
    } // else leave the sentinel triple (0, 0, 0); level 0 marks "empty"
    ++slot;
  };
  emit(0, 0, self.level, true);
  for (int j = 0; j < scenario_.n_agents; ++j) {
    if (j == agent_index) continue;
    const auto& a = state_.agents[j];
    emit(a.x - self.x, a.y - self.y, a.level, true);
  }
  for (const auto& f : state_.foods) emit(f.x - self.x, f.y - self.y, f.level, f.present);
  return obs;
}

std::vector<Eigen::VectorXf> LbfEnv::observe_all() const {
  std::vector<Eigen::VectorXf> out;
  out.reserve(scenario_.n_agents);
  for (int i = 0; i < scenario_.n_agents; ++i) out.push_back(observe(i));
  return out;
}

std::string LbfEnv::snapshot() const {
  nlohmann::json j;
  j["env"] = "lbf";
  j["step"] = state_.step_count;
  j["grid"] = {state_.grid_w, state_.grid_h};
  for (const auto& a : state_.agents)
    j["agents"].push_back({{"x", a.x}, {"y", a.y}, {"level", a.level}});
  for (const auto& f : state_.foods)
    j["foods"].push_back(
        {{"x", f.x}, {"y", f.y}, {"level", f.level}, {"present", f.present}});
  return j.dump();
}

} // namespace marlens
