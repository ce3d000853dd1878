#include "marlens/pg.hpp"

#include <cmath>

namespace marlens {

namespace {

Eigen::VectorXf log_softmax(const Eigen::VectorXf& logits) {
  const float m = logits.maxCoeff();
  const double z = (logits.array() - m).cast<double>().exp().sum();
  return (logits.array() - m - static_cast<float>(std::log(z))).matrix();
}

int sample_categorical(const Eigen::VectorXf& logits, Rng& rng) {
  Eigen::VectorXf lp = log_softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  for (int a = 0; a < lp.size(); ++a) {
    acc += std::exp(static_cast<double>(lp[a]));
    if (u < acc) return a;
  }
  return static_cast<int>(lp.size()) - 1;
}

} // namespace

PgLearner::PgLearner(Algorithm alg, const HyperParams& hp, bool param_sharing,
                     int n_agents, int obs_dim, int n_actions, std::uint64_t seed)
    : alg_(alg),
      hp_(hp),
      param_sharing_(param_sharing),
      centralized_critic_(alg == Algorithm::MAA2C || alg == Algorithm::MAPPO),
      n_agents_(n_agents),
      obs_dim_(obs_dim),
      n_actions_(n_actions),
      actor_input_dim_(obs_dim + (param_sharing ? n_agents : 0)),
      critic_input_dim_((centralized_critic_ ? n_agents * obs_dim : obs_dim) +
                        (param_sharing ? n_agents : 0)),
      rng_(seed) {
  if (is_value_based(alg)) throw ConfigInvalid("PgLearner given a value-based algorithm");

  const int n_stores = param_sharing_ ? 1 : n_agents_;
  NetSpec actor_spec{actor_input_dim_, hp_.hidden_dim, n_actions_, hp_.net_type, 1};
  // The critic is always feed-forward; the hyperparameter tables'
  // network type applies to the actor.
  NetSpec critic_spec{critic_input_dim_, hp_.hidden_dim, 1, BodyKind::FC, 1};
  for (int i = 0; i < n_stores; ++i) {
    actor_stores_.emplace_back();
    actor_nets_.emplace_back(actor_spec, "actor" + std::to_string(i));
    actor_nets_.back().init_params(actor_stores_.back(), rng_, /*head_gain=*/0.01);
    actor_optims_.emplace_back(hp_.lr);
    critic_stores_.emplace_back();
    critic_nets_.emplace_back(critic_spec, "critic" + std::to_string(i));
    critic_nets_.back().init_params(critic_stores_.back(), rng_);
    critic_optims_.emplace_back(hp_.lr);
  }
  for (const auto& s : critic_stores_) critic_targets_.push_back(s.clone());

  workers_.resize(hp_.n_workers);
  for (auto& w : workers_) {
    w.hidden.assign(n_agents_, Eigen::MatrixXf::Zero(1, hp_.hidden_dim));
  }
}

PgLearner::ActContext PgLearner::make_context() const {
  ActContext ctx;
  ctx.hidden.assign(n_agents_, Eigen::MatrixXf::Zero(1, hp_.hidden_dim));
  return ctx;
}

Eigen::VectorXf PgLearner::actor_input(int agent, const Eigen::VectorXf& obs) const {
  if (!param_sharing_) return obs;
  Eigen::VectorXf in = Eigen::VectorXf::Zero(actor_input_dim_);
  in.head(obs.size()) = obs;
  in[obs.size() + agent] = 1.0f;
  return in;
}

Eigen::VectorXf PgLearner::critic_in(int agent,
                                     const std::vector<Eigen::VectorXf>& obs) const {
  Eigen::VectorXf base = critic_input<float>(centralized_critic_, agent, obs);
  if (!param_sharing_) return base;
  Eigen::VectorXf in = Eigen::VectorXf::Zero(critic_input_dim_);
  in.head(base.size()) = base;
  in[base.size() + agent] = 1.0f;
  return in;
}

Eigen::VectorXd PgLearner::logits(ActContext& ctx, int agent,
                                  const Eigen::VectorXf& obs) const {
  const auto& net = actor_nets_[store_index(agent)];
  const auto& store = actor_stores_[store_index(agent)];
  Eigen::MatrixXf x = actor_input(agent, obs).transpose();
  Eigen::MatrixXf out = net.forward(store, x, &ctx.hidden[agent]);
  return out.row(0).transpose().cast<double>();
}

std::vector<int> PgLearner::act(ActContext& ctx, const std::vector<Eigen::VectorXf>& obs,
                                Rng& rng, bool greedy) const {
  std::vector<int> actions(n_agents_);
  for (int i = 0; i < n_agents_; ++i) {
    Eigen::VectorXf lg = logits(ctx, i, obs[i]).cast<float>();
    if (greedy) {
      int best = 0;
      for (int a = 1; a < lg.size(); ++a)
        if (lg[a] > lg[best]) best = a;
      actions[i] = best;
    } else {
      actions[i] = sample_categorical(lg, rng);
    }
  }
  return actions;
}

void PgLearner::begin_rollout() {
  if (rollout_open_) throw StaleRollout("rollout already open");
  for (auto& w : workers_) {
    w.start_hidden = w.hidden;
    w.obs.clear();
    w.actions.clear();
    w.old_logp.clear();
    w.rewards.clear();
    w.dones.clear();
    w.final_obs.clear();
  }
  rollout_open_ = true;
  rollout_ready_ = false;
}

std::vector<int> PgLearner::act_rollout(int worker,
                                        const std::vector<Eigen::VectorXf>& obs,
                                        Rng& rng) {
  if (!rollout_open_) throw StaleRollout("no open rollout");
  auto& w = workers_[worker];
  std::vector<int> actions(n_agents_);
  std::vector<float> logp(n_agents_);
  for (int i = 0; i < n_agents_; ++i) {
    const auto& net = actor_nets_[store_index(i)];
    const auto& store = actor_stores_[store_index(i)];
    Eigen::MatrixXf x = actor_input(i, obs[i]).transpose();
    Eigen::MatrixXf out = net.forward(store, x, &w.hidden[i]);
    Eigen::VectorXf lg = out.row(0).transpose();
    actions[i] = sample_categorical(lg, rng);
    logp[i] = log_softmax(lg)[actions[i]];
  }
  w.obs.push_back(obs);
  w.actions.push_back(actions);
  w.old_logp.push_back(std::move(logp));
  return actions;
}

void PgLearner::record_step(int worker, float team_reward, bool done) {
  auto& w = workers_[worker];
  w.rewards.push_back(team_reward);
  w.dones.push_back(done);
  if (done)
    for (auto& h : w.hidden) h.setZero();
}

void PgLearner::end_rollout(const std::vector<std::vector<Eigen::VectorXf>>& final_obs) {
  if (!rollout_open_) throw StaleRollout("no open rollout");
  for (int w = 0; w < hp_.n_workers; ++w) workers_[w].final_obs = final_obs[w];
  for (const auto& w : workers_)
    for (float r : w.rewards) reward_std_.observe(r);
  rollout_open_ = false;
  rollout_ready_ = true;
}

PgTrainResult PgLearner::train_step() {
  if (!rollout_ready_)
    throw StaleRollout("rollout already consumed (on-policy data cannot be reused)");
  rollout_ready_ = false;

  const int W = hp_.n_workers;
  const int T = static_cast<int>(workers_[0].rewards.size());
  const int n = n_agents_;
  const float gamma = static_cast<float>(hp_.gamma);

  // Standardized team rewards per worker.
  std::vector<std::vector<float>> rewards(W);
  for (int w = 0; w < W; ++w) {
    rewards[w].resize(T);
    for (int t = 0; t < T; ++t)
      rewards[w][t] = hp_.reward_standardization
                          ? static_cast<float>(reward_std_.standardize(workers_[w].rewards[t]))
                          : workers_[w].rewards[t];
  }

  // Per-agent critic inputs for t = 0..T (T uses the final obs).
  std::vector<std::vector<Eigen::MatrixXf>> critic_x(n); // [agent][t]: W x dim
  for (int i = 0; i < n; ++i) {
    critic_x[i].resize(T + 1);
    for (int t = 0; t <= T; ++t) {
      critic_x[i][t].resize(W, critic_input_dim_);
      for (int w = 0; w < W; ++w) {
        const auto& obs = (t < T) ? workers_[w].obs[t] : workers_[w].final_obs;
        critic_x[i][t].row(w) = critic_in(i, obs).transpose();
      }
    }
  }

  // Returns from the target critic, advantages from the pre-update
  // online critic; both fixed across PPO epochs.
  std::vector<std::vector<std::vector<float>>> returns(n), advantages(n); // [i][w][t]
  for (int i = 0; i < n; ++i) {
    const auto& net = critic_nets_[store_index(i)];
    const auto& target = critic_targets_[store_index(i)];
    const auto& online = critic_stores_[store_index(i)];
    returns[i].resize(W);
    advantages[i].resize(W);
    std::vector<Eigen::MatrixXf> v_tgt(T + 1), v_on(T);
    for (int t = 0; t <= T; ++t) v_tgt[t] = net.forward(target, critic_x[i][t]);
    for (int t = 0; t < T; ++t) v_on[t] = net.forward(online, critic_x[i][t]);
    for (int w = 0; w < W; ++w) {
      std::vector<float> values(T + 1);
      for (int t = 0; t <= T; ++t) values[t] = v_tgt[t](w, 0);
      std::vector<bool> dones(workers_[w].dones.begin(), workers_[w].dones.end());
      returns[i][w] = n_step_returns<float>(rewards[w], values, dones, gamma, hp_.n_step);
      advantages[i][w].resize(T);
      for (int t = 0; t < T; ++t) advantages[i][w][t] = returns[i][w][t] - v_on[t](w, 0);
    }
  }

  // Flat row order shared by every per-row array: agent-major, then
  // step, then worker.
  const int rows = n * T * W;
  std::vector<int> actions(rows);
  Eigen::MatrixXf adv(rows, 1), ret(rows, 1), old_lp(rows, 1);
  int r = 0;
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      for (int w = 0; w < W; ++w, ++r) {
        actions[r] = workers_[w].actions[t][i];
        adv(r, 0) = advantages[i][w][t];
        ret(r, 0) = returns[i][w][t];
        old_lp(r, 0) = workers_[w].old_logp[t][i];
      }

  // Actor inputs per agent per step.
  std::vector<std::vector<Eigen::MatrixXf>> actor_x(n);
  for (int i = 0; i < n; ++i) {
    actor_x[i].resize(T);
    for (int t = 0; t < T; ++t) {
      actor_x[i][t].resize(W, actor_input_dim_);
      for (int w = 0; w < W; ++w)
        actor_x[i][t].row(w) = actor_input(i, workers_[w].obs[t][i]).transpose();
    }
  }

  const int epochs = is_ppo() ? hp_.ppo_epochs : 1;
  PgTrainResult result;
  std::vector<std::vector<Eigen::MatrixXf>> logits_pre(n); // [agent][t], epoch 0

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Tape<float> tape;

    std::vector<Var> logit_blocks, value_blocks;
    for (int i = 0; i < n; ++i) {
      auto& net = actor_nets_[store_index(i)];
      auto& store = actor_stores_[store_index(i)];
      std::vector<Var> per_step(T);
      Eigen::MatrixXf h0(W, hp_.hidden_dim);
      for (int w = 0; w < W; ++w) h0.row(w) = workers_[w].start_hidden[i].row(0);
      Var hidden = tape.constant(std::move(h0));
      for (int t = 0; t < T; ++t) {
        Var lg = net.forward(tape, store, tape.constant(actor_x[i][t]),
                             hp_.net_type == BodyKind::GRU ? &hidden : nullptr);
        per_step[t] = lg;
        if (epoch == 0) logits_pre[i].push_back(tape.value(lg));
        if (hp_.net_type == BodyKind::GRU && t + 1 < T) {
          // reset hidden across episode boundaries inside the chunk
          Eigen::MatrixXf keep = Eigen::MatrixXf::Ones(W, hp_.hidden_dim);
          for (int w = 0; w < W; ++w)
            if (workers_[w].dones[t]) keep.row(w).setZero();
          hidden = tape.cmul(hidden, tape.constant(keep));
        }
      }
      for (int t = 0; t < T; ++t) logit_blocks.push_back(per_step[t]);

      auto& cnet = critic_nets_[store_index(i)];
      auto& cstore = critic_stores_[store_index(i)];
      for (int t = 0; t < T; ++t)
        value_blocks.push_back(cnet.forward(tape, cstore, tape.constant(critic_x[i][t])));
    }
    Var all_logits = tape.vstack(logit_blocks);
    Var all_values = tape.vstack(value_blocks);

    PgLossResult<float> loss =
        is_ppo() ? ppo_loss<float>(tape, all_logits, actions, old_lp, adv, all_values, ret,
                                   static_cast<float>(hp_.ppo_clip),
                                   static_cast<float>(hp_.entropy_coef))
                 : a2c_loss<float>(tape, all_logits, actions, adv, all_values, ret,
                                   static_cast<float>(hp_.entropy_coef));

    for (auto& s : actor_stores_) s.zero_grad();
    for (auto& s : critic_stores_) s.zero_grad();
    tape.backward_scalar(loss.total);

    std::vector<ParamStore<float>*> all;
    for (auto& s : actor_stores_) all.push_back(&s);
    for (auto& s : critic_stores_) all.push_back(&s);
    clip_global_norm(all, hp_.max_grad_norm);
    for (std::size_t k = 0; k < actor_stores_.size(); ++k) {
      actor_optims_[k].step(actor_stores_[k]);
      critic_optims_[k].step(critic_stores_[k]);
    }

    result.policy_loss = loss.policy_loss;
    result.value_loss = loss.value_loss;
    result.entropy_bonus = loss.entropy;
  }

  ++learner_steps_;
  for (std::size_t k = 0; k < critic_stores_.size(); ++k)
    target_update(critic_stores_[k], critic_targets_[k], hp_.target, learner_steps_);

  // Diagnostics: post-update policy vs pre-update snapshot on the
  // rollout observations.
  for (int i = 0; i < n; ++i) {
    const auto& net = actor_nets_[store_index(i)];
    const auto& store = actor_stores_[store_index(i)];
    Eigen::MatrixXf hidden(W, hp_.hidden_dim);
    for (int w = 0; w < W; ++w) hidden.row(w) = workers_[w].start_hidden[i].row(0);
    double ent = 0.0, div = 0.0, count = 0.0;
    for (int t = 0; t < T; ++t) {
      Eigen::MatrixXf lg = net.forward(store, actor_x[i][t],
                                       hp_.net_type == BodyKind::GRU ? &hidden : nullptr);
      for (int w = 0; w < W; ++w) {
        Eigen::VectorXd cur = extract_policy(LearnerKind::PolicyGradient,
                                             lg.row(w).transpose().cast<double>(), 0.0);
        Eigen::VectorXd old =
            extract_policy(LearnerKind::PolicyGradient,
                           logits_pre[i][t].row(w).transpose().cast<double>(), 0.0);
        ent += policy_entropy(cur);
        div += update_divergence(cur, old);
        count += 1.0;
      }
      if (hp_.net_type == BodyKind::GRU && t + 1 < T)
        for (int w = 0; w < W; ++w)
          if (workers_[w].dones[t]) hidden.row(w).setZero();
    }
    result.agent_entropy.push_back(ent / std::max(count, 1.0));
    result.agent_divergence.push_back(div / std::max(count, 1.0));
  }
  return result;
}

ParamStore<float> PgLearner::export_params() const {
  ParamStore<float> merged;
  auto copy_all = [&](const ParamStore<float>& from) {
    for (const auto& e : from.entries())
      merged.add(e.name, e.value.rows(), e.value.cols()) = e.value;
  };
  for (const auto& s : actor_stores_) copy_all(s);
  for (const auto& s : critic_stores_) copy_all(s);
  return merged;
}

void PgLearner::import_params(const ParamStore<float>& merged) {
  auto load_all = [&](ParamStore<float>& into) {
    for (auto& e : into.entries()) e.value = merged.at(e.name).value;
  };
  for (auto& s : actor_stores_) load_all(s);
  for (auto& s : critic_stores_) load_all(s);
  for (std::size_t k = 0; k < critic_stores_.size(); ++k)
    critic_targets_[k].copy_values_from(critic_stores_[k]);
}

} // namespace marlens
