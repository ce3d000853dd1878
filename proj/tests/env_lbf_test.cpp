#include "marlens/env_lbf.hpp"

#include <doctest.h>

using namespace marlens;

namespace {

const Scenario kCoop2p = parse_scenario("Foraging-8x8-2p-2f-coop-v2");

LbfState two_agent_state(int ax, int ay, int alvl, int bx, int by, int blvl, int fx,
                         int fy, int flvl) {
  LbfState s;
  s.grid_w = s.grid_h = 8;
  s.agents = {{ax, ay, alvl}, {bx, by, blvl}};
  s.foods = {{fx, fy, flvl, true}, {0, 7, 1, false}};
  s.total_food_level = flvl;
  return s;
}

} // namespace

TEST_SUITE("envlbf") {

TEST_CASE("reset places distinct entities inside the grid") {
  LbfEnv env(kCoop2p, 123);
  for (int trial = 0; trial < 50; ++trial) {
    env.reset(trial);
    const auto& s = env.state();
    std::vector<std::pair<int, int>> cells;
    for (const auto& a : s.agents) cells.emplace_back(a.x, a.y);
    for (const auto& f : s.foods) cells.emplace_back(f.x, f.y);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(cells[i].first >= 0);
      CHECK(cells[i].first < 8);
      CHECK(cells[i].second >= 0);
      CHECK(cells[i].second < 8);
      for (std::size_t j = i + 1; j < cells.size(); ++j) CHECK(cells[i] != cells[j]);
    }
    // coop: every food requires the whole team
    int level_sum = 0;
    for (const auto& a : s.agents) level_sum += a.level;
    for (const auto& f : s.foods) CHECK(f.level == level_sum);
  }
}

TEST_CASE("pickup reward splits by level and normalizes to 1 per episode") {
  LbfEnv env(kCoop2p, 1);
  env.set_state(two_agent_state(2, 2, 2, 4, 2, 1, 3, 2, 3));
  auto r = env.step({LbfLoad, LbfLoad});
  CHECK(r.rewards[0] == doctest::Approx(3.0 * 2 / (3.0 * 3)));
  CHECK(r.rewards[1] == doctest::Approx(3.0 * 1 / (3.0 * 3)));
  CHECK(r.rewards[0] + r.rewards[1] == doctest::Approx(1.0));
  CHECK(r.done); // no food left
  CHECK_THROWS_AS(env.step({LbfNoop, LbfNoop}), SteppedAfterDone);
}

TEST_CASE("pickup fails when loader levels fall short") {
  LbfEnv env(kCoop2p, 1);
  env.set_state(two_agent_state(2, 2, 1, 7, 7, 1, 3, 2, 3));
  auto r = env.step({LbfLoad, LbfNoop});
  CHECK(r.rewards[0] == 0.0f);
  CHECK(env.state().foods[0].present);
}

TEST_CASE("loading requires 4-adjacency, not diagonal") {
  LbfEnv env(kCoop2p, 1);
  env.set_state(two_agent_state(2, 1, 5, 7, 7, 1, 3, 2, 3));
  auto r = env.step({LbfLoad, LbfNoop}); // diagonal neighbor
  CHECK(env.state().foods[0].present);
  env.set_state(two_agent_state(3, 1, 5, 7, 7, 1, 3, 2, 3));
  r = env.step({LbfLoad, LbfNoop}); // directly above
  CHECK(!env.state().foods[0].present);
}

TEST_CASE("coop pickups require every agent (property over random states)") {
  LbfEnv env(kCoop2p, 5);
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int la = rng.uniform_range(1, 3), lb = rng.uniform_range(1, 3);
    // both adjacent to the food at (3,2); cooperative level = la + lb
    LbfState s = two_agent_state(2, 2, la, 4, 2, lb, 3, 2, la + lb);
    env.set_state(s);
    const bool a_loads = rng.bernoulli(0.5), b_loads = rng.bernoulli(0.5);
    env.step({a_loads ? LbfLoad : LbfNoop, b_loads ? LbfLoad : LbfNoop});
    CHECK(env.state().foods[0].present == !(a_loads && b_loads));
  }
}

TEST_CASE("movement blocking: contested cells, swaps, food, cascades") {
  LbfEnv env(kCoop2p, 1);

  // contested target cell: both stay
  env.set_state(two_agent_state(2, 2, 1, 4, 2, 1, 7, 7, 2));
  env.step({LbfRight, LbfLeft});
  CHECK(env.state().agents[0].x == 2);
  CHECK(env.state().agents[1].x == 4);

  // swap: both stay
  env.set_state(two_agent_state(2, 2, 1, 3, 2, 1, 7, 7, 2));
  env.step({LbfRight, LbfLeft});
  CHECK(env.state().agents[0].x == 2);
  CHECK(env.state().agents[1].x == 3);

  // food blocks movement
  env.set_state(two_agent_state(2, 2, 1, 6, 6, 1, 3, 2, 2));
  env.step({LbfRight, LbfNoop});
  CHECK(env.state().agents[0].x == 2);

  // cascade: B walks into blocked A
  env.set_state(two_agent_state(2, 2, 1, 1, 2, 1, 3, 2, 2));
  env.step({LbfRight, LbfRight}); // A blocked by food, B blocked by A
  CHECK(env.state().agents[0].x == 2);
  CHECK(env.state().agents[1].x == 1);

  // grid edge blocks
  env.set_state(two_agent_state(0, 0, 1, 6, 6, 1, 3, 3, 2));
  env.step({LbfLeft, LbfNoop});
  CHECK(env.state().agents[0].x == 0);
}

TEST_CASE("episode ends at the horizon") {
  LbfEnv env(kCoop2p, 99, /*horizon=*/3);
  env.reset(42);
  for (int t = 0; t < 3; ++t) {
    CHECK(!env.done());
    env.step({LbfNoop, LbfNoop});
  }
  CHECK(env.done());
}

TEST_CASE("invalid actions are rejected") {
  LbfEnv env(kCoop2p, 3);
  env.reset(1);
  CHECK_THROWS_AS(env.step({LbfNoop}), InvalidAction);
  CHECK_THROWS_AS(env.step({LbfNoop, 6}), InvalidAction);
  CHECK_THROWS_AS(env.step({-1, LbfNoop}), InvalidAction);
}

TEST_CASE("observations: relative triples, self first, sight masking") {
  LbfEnv env(parse_scenario("Foraging-2s-8x8-2p-2f-coop-v2"), 1);
  env.set_state(two_agent_state(2, 3, 2, 3, 4, 1, 4, 3, 3));
  const auto obs = env.observe(0);
  REQUIRE(obs.size() == 12);
  // self triple
  CHECK(obs[0] == 0.0f);
  CHECK(obs[1] == 0.0f);
  CHECK(obs[2] == 2.0f);
  // the other agent, one right one down (within sight 2)
  CHECK(obs[3] == 1.0f);
  CHECK(obs[4] == 1.0f);
  CHECK(obs[5] == 1.0f);
  // first food at dx=2 (exactly at the sight boundary)
  CHECK(obs[6] == 2.0f);
  CHECK(obs[7] == 0.0f);
  CHECK(obs[8] == 3.0f);
  // absent food: sentinel zeros
  CHECK(obs[9] == 0.0f);
  CHECK(obs[10] == 0.0f);
  CHECK(obs[11] == 0.0f);

  // out of sight: food pushed beyond radius 2
  LbfState far = two_agent_state(2, 3, 2, 3, 4, 1, 5, 3, 3);
  env.set_state(far);
  const auto obs2 = env.observe(0);
  CHECK(obs2[6] == 0.0f);
  CHECK(obs2[8] == 0.0f); // level 0 marks "empty"
}

TEST_CASE("seeded trajectories are byte-exact") {
  LbfEnv a(kCoop2p, 4242), b(kCoop2p, 4242);
  Rng actions(9);
  a.reset(7);
  b.reset(7);
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> joint = {actions.uniform_int(6), actions.uniform_int(6)};
    auto ra = a.step(joint);
    auto rb = b.step(joint);
    REQUIRE(a.snapshot() == b.snapshot());
    for (int i = 0; i < 2; ++i) {
      REQUIRE(ra.rewards[i] == rb.rewards[i]);
      REQUIRE(ra.obs[i] == rb.obs[i]);
    }
    if (ra.done) {
      a.reset(static_cast<std::uint64_t>(t));
      b.reset(static_cast<std::uint64_t>(t));
    }
  }
}

TEST_CASE("a too-small grid is rejected") {
  Scenario s = parse_scenario("Foraging-1x1-2p-2f-coop-v2");
  CHECK_THROWS_AS(LbfEnv(s, 1), GridTooSmall);
}

} // TEST_SUITE
