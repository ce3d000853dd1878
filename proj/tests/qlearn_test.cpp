#include "marlens/qlearn.hpp"

#include <doctest.h>

#include <cmath>

using namespace marlens;

namespace {

Eigen::VectorXf unit_obs(int dim) { return Eigen::VectorXf::Ones(dim); }

/// One-step two-agent "bandit" episode: team reward counts how many
/// agents picked action 0.
EpisodeRecord bandit_episode(int a0, int a1, int obs_dim) {
  EpisodeRecord ep;
  ep.obs = {{unit_obs(obs_dim), unit_obs(obs_dim)}, {unit_obs(obs_dim), unit_obs(obs_dim)}};
  ep.actions = {{a0, a1}};
  ep.team_rewards = {static_cast<float>((a0 == 0) + (a1 == 0))};
  return ep;
}

HyperParams bandit_hp() {
  HyperParams hp;
  hp.hidden_dim = 16;
  hp.lr = 5e-3;
  hp.net_type = BodyKind::FC;
  hp.reward_standardization = false;
  hp.batch_size = 8;
  hp.buffer_capacity = 64;
  hp.target = {TargetMode::Hard, 10, 0.01};
  hp.gamma = 0.99;
  return hp;
}

} // namespace

TEST_SUITE("qlearn") {

TEST_CASE("epsilon schedule is linear with a floor") {
  const EpsilonSchedule sched{1.0, 0.05, 2000000};
  CHECK(sched.at(0) == 1.0);
  CHECK(sched.at(1000000) == doctest::Approx(0.525));
  CHECK(sched.at(2000000) == 0.05);
  CHECK(sched.at(5000000) == 0.05);
}

TEST_CASE("select_action: greedy with low-index tie break, uniform exploration") {
  Rng rng(12);
  Eigen::VectorXd q(4);
  q << 1.0, 3.0, 3.0, 0.0;
  CHECK(select_action<double>(q, 0.0, rng) == 1);

  std::vector<int> hits(4, 0);
  for (int i = 0; i < 4000; ++i) ++hits[select_action<double>(q, 1.0, rng)];
  for (int h : hits) CHECK(h > 700);
}

TEST_CASE("mix_vdn is the exact sum") {
  CHECK(mix_vdn<double>({1.5, -0.5, 2.0}) == 3.0);
  Tape<double> tape;
  MatrixX<double> q(2, 3);
  q << 1, 2, 3, -1, 0, 1;
  Var total = mix_vdn(tape, tape.constant(q));
  CHECK(tape.value(total)(0, 0) == 6.0);
  CHECK(tape.value(total)(1, 0) == 0.0);
}

TEST_CASE("mix_qmix is monotone in every agent value") {
  Rng rng(66);
  const QmixDims dims{3, 5, 8, 16};
  ParamStore<double> mixer;
  init_qmix_mixer(mixer, dims, rng);
  for (auto& e : mixer.entries())
    if (e.name.find(".b") != std::string::npos)
      for (Eigen::Index i = 0; i < e.value.size(); ++i)
        e.value(0, i) = rng.normal(); // nonzero biases too
  const double delta = 1e-3;
  for (int trial = 0; trial < 200; ++trial) {
    MatrixX<double> q(1, 3), state(1, 5);
    for (int i = 0; i < 3; ++i) q(0, i) = rng.normal();
    for (int i = 0; i < 5; ++i) state(0, i) = rng.normal();
    for (int agent = 0; agent < 3; ++agent) {
      Tape<double> tape;
      const double base =
          tape.value(mix_qmix(tape, mixer, tape.constant(q), tape.constant(state), dims,
                              /*trainable=*/false))(0, 0);
      MatrixX<double> bumped = q;
      bumped(0, agent) += delta;
      Tape<double> tape2;
      const double up =
          tape2.value(mix_qmix(tape2, mixer, tape2.constant(bumped), tape2.constant(state),
                               dims, /*trainable=*/false))(0, 0);
      REQUIRE(up - base >= -1e-12);
    }
  }
}

TEST_CASE("replay buffer evicts oldest and refuses short sampling") {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) {
    EpisodeRecord ep = bandit_episode(0, 0, 2);
    ep.team_rewards[0] = static_cast<float>(i);
    buffer.insert(std::move(ep));
  }
  CHECK(buffer.size() == 3);
  CHECK(buffer.at(0).team_rewards[0] == 2.0f); // 0 and 1 evicted

  Rng rng(3);
  CHECK_THROWS_AS(buffer.sample(4, rng), BufferUnderflow);
  const auto batch = buffer.sample(3, rng);
  // without replacement: all distinct
  CHECK(batch[0] != batch[1]);
  CHECK(batch[1] != batch[2]);
  CHECK(batch[0] != batch[2]);
}

TEST_CASE("reward standardizer tracks mean and std") {
  RewardStandardizer rs;
  for (double r : {1.0, 2.0, 3.0, 4.0, 5.0}) rs.observe(r);
  CHECK(rs.mean() == doctest::Approx(3.0));
  CHECK(rs.std() == doctest::Approx(std::sqrt(2.5)));
  CHECK(rs.standardize(3.0) == doctest::Approx(0.0));
  CHECK(rs.standardize(5.0) == doctest::Approx(2.0 / std::sqrt(2.5)));
}

TEST_CASE("train_step underflows on an empty buffer") {
  QLearner learner(Algorithm::IQL, bandit_hp(), true, 2, 3, 2, 1);
  CHECK_THROWS_AS(learner.train_step(), BufferUnderflow);
}

TEST_CASE("IQL learns a one-step bandit") {
  const int obs_dim = 3;
  HyperParams hp = bandit_hp();
  QLearner learner(Algorithm::IQL, hp, /*param_sharing=*/true, 2, obs_dim, 2, 7);
  Rng rng(2);
  for (int i = 0; i < 32; ++i)
    learner.store_episode(bandit_episode(rng.uniform_int(2), rng.uniform_int(2), obs_dim));
  QTrainResult last;
  for (int step = 0; step < 300; ++step) last = learner.train_step();
  CHECK(last.entropy.size() == 2);
  CHECK(last.divergence.size() == 2);

  auto ctx = learner.make_context();
  for (int agent = 0; agent < 2; ++agent) {
    const auto q = learner.q_values(ctx, agent, unit_obs(obs_dim));
    CAPTURE(agent);
    // action 0 pays: its fitted value approaches E[team r | a_i = 0],
    // which sits between 1 and 2 under a random partner
    CHECK(q[0] > q[1]);
    CHECK(q[0] > 1.0);
    CHECK(q[0] < 2.1);
  }
}

TEST_CASE("diagnostics reflect the behavior policy's epsilon") {
  QLearner learner(Algorithm::IQL, bandit_hp(), true, 2, 3, 2, 31);
  Rng rng(4);
  for (int i = 0; i < 16; ++i)
    learner.store_episode(bandit_episode(rng.uniform_int(2), rng.uniform_int(2), 3));
  // epsilon 1: the induced policy is uniform regardless of the Q values
  const auto uniform = learner.train_step(1.0);
  for (double e : uniform.entropy) CHECK(e == doctest::Approx(std::log(2.0)));
  // epsilon 0: greedy, zero entropy
  const auto greedy = learner.train_step(0.0);
  for (double e : greedy.entropy) CHECK(e == doctest::Approx(0.0));
}

TEST_CASE("VDN joint values approach the team reward") {
  const int obs_dim = 3;
  HyperParams hp = bandit_hp();
  QLearner learner(Algorithm::VDN, hp, /*param_sharing=*/false, 2, obs_dim, 2, 9);
  // full coverage of the joint action space keeps the fit exact
  for (int i = 0; i < 8; ++i)
    learner.store_episode(bandit_episode(i % 2, (i / 2) % 2, obs_dim));
  for (int step = 0; step < 400; ++step) learner.train_step();

  auto ctx = learner.make_context();
  const auto q0 = learner.q_values(ctx, 0, unit_obs(obs_dim));
  const auto q1 = learner.q_values(ctx, 1, unit_obs(obs_dim));
  // one-step episodes: Q_tot(a) = r(a); the additive mix represents it exactly
  CHECK(q0[0] + q1[0] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(q0[0] + q1[1] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(q0[1] + q1[1] == doctest::Approx(0.0).epsilon(0.1));
}

TEST_CASE("QMIX learns the bandit and stays monotone") {
  const int obs_dim = 3;
  HyperParams hp = bandit_hp();
  hp.mixing_embed_dim = 8;
  hp.hypernet_dim = 16;
  QLearner learner(Algorithm::QMIX, hp, /*param_sharing=*/true, 2, obs_dim, 2, 11);
  for (int i = 0; i < 16; ++i)
    learner.store_episode(bandit_episode(i % 2, (i / 2) % 2, obs_dim));
  for (int step = 0; step < 300; ++step) learner.train_step();

  auto ctx = learner.make_context();
  for (int agent = 0; agent < 2; ++agent) {
    const auto q = learner.q_values(ctx, agent, unit_obs(obs_dim));
    CHECK(q[0] > q[1]); // argmax of the monotone mix decomposes per agent
  }
}

TEST_CASE("export/import round-trips the learner") {
  HyperParams hp = bandit_hp();
  QLearner a(Algorithm::VDN, hp, true, 2, 3, 2, 21);
  QLearner b(Algorithm::VDN, hp, true, 2, 3, 2, 99);
  b.import_params(a.export_params());
  auto ca = a.make_context(), cb = b.make_context();
  const auto qa = a.q_values(ca, 0, unit_obs(3));
  const auto qb = b.q_values(cb, 0, unit_obs(3));
  CHECK(qa == qb);
}

} // TEST_SUITE
