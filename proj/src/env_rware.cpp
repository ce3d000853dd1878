#include "marlens/env_rware.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace marlens {

namespace {

// Heading deltas, indexed by Heading: N, E, S, W.
constexpr int kHx[] = {0, 1, 0, -1};
constexpr int kHy[] = {-1, 0, 1, 0};

} // namespace

std::vector<CellKind> RwareEnv::make_layout(int grid_w, int grid_h) {
  std::vector<CellKind> layout(static_cast<std::size_t>(grid_w) * grid_h, CellKind::Empty);
  // Rack pairs at columns (3k+1, 3k+2) and rows (3k+1, 3k+2), keeping
  // the outer ring, every third row/column, and the bottom two rows as
  // corridors so every shelf stays reachable.
  for (int y = 1; y < grid_h - 2; ++y) {
    if (y % 3 == 0) continue;
    for (int x = 1; x < grid_w - 1; ++x) {
      if (x % 3 == 0) continue;
      layout[y * grid_w + x] = CellKind::ShelfRack;
    }
  }
  layout[(grid_h - 1) * grid_w + grid_w / 2 - 1] = CellKind::Goal;
  layout[(grid_h - 1) * grid_w + grid_w / 2] = CellKind::Goal;
  return layout;
}

RwareEnv::RwareEnv(const Scenario& scenario, std::uint64_t seed, int horizon)
    : scenario_(scenario), horizon_(horizon), rng_(seed) {
  if (scenario.env_kind != EnvKind::RWARE)
    throw std::invalid_argument("RwareEnv requires an RWARE scenario");
  if (!scenario.size_class ||
      (*scenario.size_class != SizeClass::Tiny && *scenario.size_class != SizeClass::Small))
    throw UnsupportedSizeClass("only tiny and small RWARE maps are constructible");
  reset();
}

std::vector<Eigen::VectorXf> RwareEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  return reset();
}

std::vector<Eigen::VectorXf> RwareEnv::reset() {
  state_ = RwareState{};
  state_.grid_w = scenario_.grid_w;
  state_.grid_h = scenario_.grid_h;
  state_.layout = make_layout(state_.grid_w, state_.grid_h);

  std::vector<int> floor_cells;
  for (int i = 0; i < state_.grid_w * state_.grid_h; ++i) {
    if (state_.layout[i] == CellKind::ShelfRack) {
      RwareShelf s;
      s.home_x = s.x = i % state_.grid_w;
      s.home_y = s.y = i / state_.grid_w;
      state_.shelves.push_back(s);
    } else {
      floor_cells.push_back(i);
    }
  }
  if (static_cast<int>(state_.shelves.size()) < scenario_.n_agents)
    throw GridTooSmall("fewer shelves than agents");
  if (static_cast<int>(floor_cells.size()) < scenario_.n_agents)
    throw GridTooSmall("fewer floor cells than agents");

  for (int i = 0; i < scenario_.n_agents; ++i) {
    const int k = rng_.uniform_int(static_cast<int>(floor_cells.size()));
    const int cell = floor_cells[k];
    floor_cells[k] = floor_cells.back();
    floor_cells.pop_back();
    RwareAgent a;
    a.x = cell % state_.grid_w;
    a.y = cell / state_.grid_w;
    a.heading = static_cast<Heading>(rng_.uniform_int(4));
    state_.agents.push_back(a);
  }

  std::vector<int> shelf_ids(state_.shelves.size());
  for (std::size_t i = 0; i < shelf_ids.size(); ++i) shelf_ids[i] = static_cast<int>(i);
  for (int i = 0; i < scenario_.n_agents; ++i) {
    const int k = rng_.uniform_int(static_cast<int>(shelf_ids.size()));
    state_.shelves[shelf_ids[k]].requested = true;
    shelf_ids[k] = shelf_ids.back();
    shelf_ids.pop_back();
  }

  done_ = false;
  return observe_all();
}

int RwareEnv::n_requested() const {
  return static_cast<int>(std::count_if(state_.shelves.begin(), state_.shelves.end(),
                                        [](const RwareShelf& s) { return s.requested; }));
}

RwareStepResult RwareEnv::step(const std::vector<int>& joint_action) {
  if (done_) throw SteppedAfterDone("RWARE episode is over");
  if (static_cast<int>(joint_action.size()) != scenario_.n_agents)
    throw InvalidAction("expected one action per agent");
  for (int a : joint_action)
    if (a < 0 || a >= kRwareNumActions)
      throw InvalidAction("RWARE action out of range: " + std::to_string(a));

  const int n = scenario_.n_agents;

  for (int i = 0; i < n; ++i) {
    auto& agent = state_.agents[i];
    if (joint_action[i] == RwTurnLeft)
      agent.heading = static_cast<Heading>((static_cast<int>(agent.heading) + 3) % 4);
    else if (joint_action[i] == RwTurnRight)
      agent.heading = static_cast<Heading>((static_cast<int>(agent.heading) + 1) % 4);
  }

  // Forward moves, resolved like LBF: contested targets, swaps, and
  // moves into blocked cells all cancel, with cascading demotion.
  std::vector<int> tx(n), ty(n);
  std::vector<bool> moving(n, false);
  for (int i = 0; i < n; ++i) {
    const auto& agent = state_.agents[i];
    tx[i] = agent.x;
    ty[i] = agent.y;
    if (joint_action[i] != RwForward) continue;
    const int h = static_cast<int>(agent.heading);
    const int x = agent.x + kHx[h], y = agent.y + kHy[h];
    if (x < 0 || x >= state_.grid_w || y < 0 || y >= state_.grid_h) continue;
    if (agent.carrying) {
      bool blocked = false;
      for (std::size_t s = 0; s < state_.shelves.size(); ++s) {
        if (static_cast<int>(s) == *agent.carrying) continue;
        if (state_.shelves[s].x == x && state_.shelves[s].y == y) blocked = true;
      }
      if (blocked) continue;
    }
    tx[i] = x;
    ty[i] = y;
    moving[i] = true;
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
    if (!moving[i]) continue;
    auto& agent = state_.agents[i];
    agent.x = tx[i];
    agent.y = ty[i];
    if (agent.carrying) {
      state_.shelves[*agent.carrying].x = agent.x;
      state_.shelves[*agent.carrying].y = agent.y;
    }
  }

  // Pickups and putdowns.
  for (int i = 0; i < n; ++i) {
    if (joint_action[i] != RwToggleLoad) continue;
    auto& agent = state_.agents[i];
    if (!agent.carrying) {
      for (std::size_t s = 0; s < state_.shelves.size(); ++s) {
        if (state_.shelves[s].x != agent.x || state_.shelves[s].y != agent.y) continue;
        bool held = false;
        for (const auto& other : state_.agents)
          if (other.carrying && *other.carrying == static_cast<int>(s)) held = true;
        if (!held) {
          agent.carrying = static_cast<int>(s);
          break;
        }
      }
    } else if (cell(agent.x, agent.y) != CellKind::Goal) {
      agent.carrying.reset();
    }
  }

  // Deliveries: a carried, requested shelf on a goal cell scores +1
  // for the whole team and a replacement request is drawn.
  RwareStepResult result;
  result.rewards.assign(n, 0.0f);
  for (int i = 0; i < n; ++i) {
    auto& agent = state_.agents[i];
    if (!agent.carrying) continue;
    auto& shelf = state_.shelves[*agent.carrying];
    if (!shelf.requested || cell(agent.x, agent.y) != CellKind::Goal) continue;
    shelf.requested = false;
    std::vector<int> candidates;
    for (std::size_t s = 0; s < state_.shelves.size(); ++s)
      if (!state_.shelves[s].requested) candidates.push_back(static_cast<int>(s));
    state_.shelves[candidates[rng_.uniform_int(static_cast<int>(candidates.size()))]]
        .requested = true;
    for (int k = 0; k < n; ++k) result.rewards[k] += 1.0f;
  }

  ++state_.step_count;
  done_ = state_.step_count >= horizon_;
  result.done = done_;
  result.obs = observe_all();
  return result;
}

Eigen::VectorXf RwareEnv::observe(int agent_index) const {
  const auto& self = state_.agents[agent_index];
  Eigen::VectorXf obs = Eigen::VectorXf::Zero(obs_dim());
  int base = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = self.x + dx, y = self.y + dy;
      if (x < 0 || x >= state_.grid_w || y < 0 || y >= state_.grid_h) {
        obs[base + 0] = 1.0f; // wall
      } else {
        for (const auto& a : state_.agents) {
          if (a.x == x && a.y == y) {
            obs[base + 1] = 1.0f;
            obs[base + 2 + static_cast<int>(a.heading)] = 1.0f;
          }
        }
        for (const auto& s : state_.shelves) {
          if (s.x == x && s.y == y) {
            obs[base + 6] = 1.0f;
            if (s.requested) obs[base + 7] = 1.0f;
          }
        }
      }
      base += 8;
    }
  }
  obs[base + 0] = self.carrying ? 1.0f : 0.0f;
  obs[base + 1 + static_cast<int>(self.heading)] = 1.0f;
  return obs;
}

std::vector<Eigen::VectorXf> RwareEnv::observe_all() const {
  std::vector<Eigen::VectorXf> out;
  out.reserve(scenario_.n_agents);
  for (int i = 0; i < scenario_.n_agents; ++i) out.push_back(observe(i));
  return out;
}

std::string RwareEnv::snapshot() const {
  nlohmann::json j;
  j["env"] = "rware";
  j["step"] = state_.step_count;
  j["grid"] = {state_.grid_w, state_.grid_h};
  for (const auto& a : state_.agents)
    j["agents"].push_back({{"x", a.x},
                           {"y", a.y},
                           {"heading", static_cast<int>(a.heading)},
                           {"carrying", a.carrying ? nlohmann::json(*a.carrying)
                                                   : nlohmann::json(nullptr)}});
  for (const auto& s : state_.shelves)
    j["shelves"].push_back(
        {{"x", s.x}, {"y", s.y}, {"requested", s.requested}});
  return j.dump();
}

} // namespace marlens
