#include "marlens/env_rware.hpp"

#include <doctest.h>

using namespace marlens;

namespace {

const Scenario kTiny2 = parse_scenario("rware-tiny-2ag-v1");

/// Minimal hand-built state on the tiny layout.
RwareState base_state() {
  RwareState s;
  s.grid_w = s.grid_h = 11;
  s.layout = RwareEnv::make_layout(11, 11);
  for (int i = 0; i < 11 * 11; ++i) {
    if (s.layout[i] == CellKind::ShelfRack) {
      RwareShelf sh;
      sh.home_x = sh.x = i % 11;
      sh.home_y = sh.y = i / 11;
      s.shelves.push_back(sh);
    }
  }
  s.agents = {{0, 0, Heading::E, std::nullopt}, {10, 0, Heading::W, std::nullopt}};
  s.shelves[0].requested = true;
  s.shelves[1].requested = true;
  return s;
}

} // namespace

TEST_SUITE("envrware") {

TEST_CASE("layout: two goals centered on the bottom edge, corridors kept") {
  const auto layout = RwareEnv::make_layout(11, 11);
  int goals = 0, racks = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      const CellKind c = layout[y * 11 + x];
      if (c == CellKind::Goal) {
        ++goals;
        CHECK(y == 10);
      }
      if (c == CellKind::ShelfRack) {
        ++racks;
        // outer ring and the bottom two rows stay walkable
        CHECK(x > 0);
        CHECK(x < 10);
        CHECK(y > 0);
        CHECK(y < 9);
      }
    }
  CHECK(goals == 2);
  CHECK(racks > 0);
}

TEST_CASE("reset requests exactly one shelf per agent") {
  RwareEnv env(kTiny2, 5);
  for (int trial = 0; trial < 20; ++trial) {
    env.reset(trial);
    CHECK(env.n_requested() == 2);
  }
}

TEST_CASE("request queue size is invariant under random play") {
  RwareEnv env(kTiny2, 8);
  env.reset(3);
  Rng rng(4);
  for (int t = 0; t < 400; ++t) {
    if (env.done()) env.reset(t);
    env.step({rng.uniform_int(5), rng.uniform_int(5)});
    REQUIRE(env.n_requested() == 2);
  }
}

TEST_CASE("turning and forward movement follow the heading") {
  RwareEnv env(kTiny2, 1);
  RwareState s = base_state();
  env.set_state(s);
  env.step({RwTurnRight, RwNoop}); // E -> S
  CHECK(env.state().agents[0].heading == Heading::S);
  env.step({RwForward, RwNoop});
  CHECK(env.state().agents[0].x == 0);
  CHECK(env.state().agents[0].y == 1);
  env.step({RwTurnLeft, RwNoop}); // S -> E
  CHECK(env.state().agents[0].heading == Heading::E);

  // forward off the grid is a no-op
  env.set_state(base_state());
  env.step({RwNoop, RwForward}); // agent 1 faces W at x=10 -> moves
  CHECK(env.state().agents[1].x == 9);
  RwareState edge = base_state();
  edge.agents[1].heading = Heading::N; // at y=0
  env.set_state(edge);
  env.step({RwNoop, RwForward});
  CHECK(env.state().agents[1].y == 0);
}

TEST_CASE("pickup, carry, and blocked putdown on goals") {
  RwareEnv env(kTiny2, 1);
  RwareState s = base_state();
  // the first rack cell is (1,1); the corridor to its west is free
  s.agents[0] = {s.shelves[0].x, s.shelves[0].y, Heading::W, std::nullopt};
  env.set_state(s);
  env.step({RwToggleLoad, RwNoop});
  REQUIRE(env.state().agents[0].carrying == 0);

  // the carried shelf follows the agent
  env.step({RwForward, RwNoop});
  CHECK(env.state().agents[0].x == s.agents[0].x - 1);
  CHECK(env.state().shelves[0].x == env.state().agents[0].x);
  CHECK(env.state().shelves[0].y == env.state().agents[0].y);

  // putdown works on a floor cell
  env.step({RwToggleLoad, RwNoop});
  CHECK(!env.state().agents[0].carrying.has_value());
}

TEST_CASE("carried shelves cannot pass through parked shelves") {
  RwareEnv env(kTiny2, 1);
  RwareState s = base_state();
  // shelf 0 is at a rack; its rack neighbor below (same column pair) blocks
  const int x = s.shelves[0].x, y = s.shelves[0].y;
  REQUIRE(s.layout[(y + 1) * 11 + x] == CellKind::ShelfRack);
  s.agents[0] = {x, y, Heading::S, 0};
  s.shelves[0].x = x;
  s.shelves[0].y = y;
  env.set_state(s);
  env.step({RwForward, RwNoop});
  CHECK(env.state().agents[0].y == y); // blocked by the parked shelf below

  // without the load the same move succeeds
  s.agents[0].carrying.reset();
  env.set_state(s);
  env.step({RwForward, RwNoop});
  CHECK(env.state().agents[0].y == y + 1);
}

TEST_CASE("delivering a requested shelf pays the whole team and refills") {
  RwareEnv env(kTiny2, 1);
  RwareState s = base_state();
  const int gx = 11 / 2 - 1, gy = 10;
  REQUIRE(s.layout[gy * 11 + gx] == CellKind::Goal);
  s.agents[0] = {gx, gy, Heading::N, 0};
  s.shelves[0].x = gx;
  s.shelves[0].y = gy;
  env.set_state(s);
  auto r = env.step({RwNoop, RwNoop});
  CHECK(r.rewards[0] == 1.0f);
  CHECK(r.rewards[1] == 1.0f); // shared team reward
  CHECK(!env.state().shelves[0].requested);
  CHECK(env.n_requested() == 2); // replacement drawn

  // second step on the goal: the shelf is no longer requested
  r = env.step({RwNoop, RwNoop});
  CHECK(r.rewards[0] == 0.0f);
}

TEST_CASE("observation layout: walls, carry flag, heading one-hot") {
  RwareEnv env(kTiny2, 2);
  RwareState s = base_state();
  env.set_state(s);
  const auto obs = env.observe(0);
  REQUIRE(obs.size() == 77);
  // agent 0 sits in the corner: the entire top row and left column of
  // its 3x3 window are walls
  for (int cell : {0, 1, 2, 3, 6}) CHECK(obs[cell * 8 + 0] == 1.0f);
  CHECK(obs[4 * 8 + 1] == 1.0f); // itself in the window center
  CHECK(obs[72 + 0] == 0.0f);    // not carrying
  CHECK(obs[72 + 1 + static_cast<int>(Heading::E)] == 1.0f);
}

TEST_CASE("seeded trajectories are byte-exact") {
  RwareEnv a(kTiny2, 99), b(kTiny2, 99);
  a.reset(5);
  b.reset(5);
  Rng actions(6);
  for (int t = 0; t < 1000; ++t) {
    if (a.done()) {
      a.reset(t);
      b.reset(t);
    }
    std::vector<int> joint = {actions.uniform_int(5), actions.uniform_int(5)};
    auto ra = a.step(joint);
    auto rb = b.step(joint);
    REQUIRE(a.snapshot() == b.snapshot());
    for (int i = 0; i < 2; ++i) REQUIRE(ra.obs[i] == rb.obs[i]);
  }
}

TEST_CASE("medium and large maps are rejected") {
  CHECK_THROWS_AS(RwareEnv(parse_scenario("rware-medium-4ag-v1"), 1), UnsupportedSizeClass);
  CHECK_THROWS_AS(RwareEnv(parse_scenario("rware-large-4ag-v1"), 1), UnsupportedSizeClass);
}

} // TEST_SUITE
