#include "marlens/qlearn.hpp"

#include <algorithm>

namespace marlens {

QLearner::QLearner(Algorithm alg, const HyperParams& hp, bool param_sharing, int n_agents,
                   int obs_dim, int n_actions, std::uint64_t seed)
    : alg_(alg),
      hp_(hp),
      param_sharing_(param_sharing),
      n_agents_(n_agents),
      obs_dim_(obs_dim),
      n_actions_(n_actions),
      input_dim_(obs_dim + (param_sharing ? n_agents : 0)),
      buffer_(hp.buffer_capacity),
      rng_(seed) {
  if (!is_value_based(alg)) throw ConfigInvalid("QLearner given a policy-gradient algorithm");

  const int n_stores = param_sharing_ ? 1 : n_agents_;
  NetSpec spec{input_dim_, hp_.hidden_dim, n_actions_, hp_.net_type, 1};
  for (int i = 0; i < n_stores; ++i) {
    stores_.emplace_back();
    nets_.emplace_back(spec, "agent" + std::to_string(i));
    nets_.back().init_params(stores_.back(), rng_);
    optims_.emplace_back(hp_.lr);
  }
  for (const auto& s : stores_) targets_.push_back(s.clone());

  if (alg_ == Algorithm::QMIX) {
    qdims_ = QmixDims{n_agents_, n_agents_ * obs_dim_, hp_.mixing_embed_dim,
                      hp_.hypernet_dim};
    init_qmix_mixer(mixer_, qdims_, rng_);
    mixer_target_ = mixer_.clone();
    mixer_optim_ = std::make_unique<Adam<float>>(hp_.lr);
  }
}

QLearner::ActContext QLearner::make_context() const {
  ActContext ctx;
  for (int i = 0; i < n_agents_; ++i)
    ctx.hidden.push_back(Eigen::MatrixXf::Zero(1, hp_.hidden_dim));
  return ctx;
}

Eigen::VectorXf QLearner::make_input(int agent, const Eigen::VectorXf& obs) const {
  if (!param_sharing_) return obs;
  Eigen::VectorXf in = Eigen::VectorXf::Zero(input_dim_);
  in.head(obs.size()) = obs;
  in[obs.size() + agent] = 1.0f;
  return in;
}

Eigen::VectorXd QLearner::q_values(ActContext& ctx, int agent,
                                   const Eigen::VectorXf& obs) const {
  const auto& net = nets_[store_index(agent)];
  const auto& store = stores_[store_index(agent)];
  Eigen::MatrixXf x = make_input(agent, obs).transpose();
  Eigen::MatrixXf q = net.forward(store, x, &ctx.hidden[agent]);
  return q.row(0).transpose().cast<double>();
}

std::vector<int> QLearner::act(ActContext& ctx, const std::vector<Eigen::VectorXf>& obs,
                               double epsilon, Rng& rng) const {
  std::vector<int> actions(n_agents_);
  for (int i = 0; i < n_agents_; ++i) {
    Eigen::VectorXf q = q_values(ctx, i, obs[i]).cast<float>();
    actions[i] = select_action<float>(q, epsilon, rng);
  }
  return actions;
}

void QLearner::store_episode(EpisodeRecord ep) {
  for (float r : ep.team_rewards) reward_std_.observe(r);
  buffer_.insert(std::move(ep));
}

QTrainResult QLearner::train_step(double policy_epsilon) {
  const double diag_eps =
      policy_epsilon >= 0.0 ? policy_epsilon : hp_.evaluation_epsilon;
  const int B = hp_.batch_size;
  const auto batch = buffer_.sample(B, rng_);
  const int n = n_agents_;

  int t_max = 0;
  for (const auto* ep : batch) t_max = std::max(t_max, ep->length());

  // Padded per-agent inputs for t = 0..t_max (terminal observation
  // repeated past episode end; those rows are masked out of the loss).
  std::vector<std::vector<Eigen::MatrixXf>> inputs(n);
  std::vector<Eigen::MatrixXf> state; // QMIX global state, concat of raw obs
  for (int i = 0; i < n; ++i) inputs[i].resize(t_max + 1);
  state.resize(t_max + 1);
  for (int t = 0; t <= t_max; ++t) {
    for (int i = 0; i < n; ++i) inputs[i][t].resize(B, input_dim_);
    state[t].resize(B, n * obs_dim_);
    for (int b = 0; b < B; ++b) {
      const auto* ep = batch[b];
      const int tt = std::min(t, ep->length());
      for (int i = 0; i < n; ++i) {
        inputs[i][t].row(b) = make_input(i, ep->obs[tt][i]).transpose();
        state[t].row(b).segment(i * obs_dim_, obs_dim_) = ep->obs[tt][i].transpose();
      }
    }
  }

  std::vector<Eigen::MatrixXf> mask(t_max), done(t_max), reward(t_max);
  double total_valid = 0.0;
  for (int t = 0; t < t_max; ++t) {
    mask[t].setZero(B, 1);
    done[t].setZero(B, 1);
    reward[t].setZero(B, 1);
    for (int b = 0; b < B; ++b) {
      const auto* ep = batch[b];
      if (t >= ep->length()) continue;
      mask[t](b, 0) = 1.0f;
      total_valid += 1.0;
      if (t == ep->length() - 1) done[t](b, 0) = 1.0f;
      const float r = ep->team_rewards[t];
      reward[t](b, 0) =
          hp_.reward_standardization ? static_cast<float>(reward_std_.standardize(r)) : r;
    }
  }

  Tape<float> tape;

  // Online unroll (taped): chosen-action Q per agent per step.
  std::vector<std::vector<Var>> chosen(n);
  std::vector<std::vector<Eigen::MatrixXf>> q_pre(n); // full Q rows for diagnostics
  for (int i = 0; i < n; ++i) {
    auto& net = nets_[store_index(i)];
    auto& store = stores_[store_index(i)];
    Var hidden = tape.constant(Eigen::MatrixXf::Zero(B, hp_.hidden_dim));
    for (int t = 0; t < t_max; ++t) {
      Var q = net.forward(tape, store, tape.constant(inputs[i][t]),
                          hp_.net_type == BodyKind::GRU ? &hidden : nullptr);
      std::vector<int> acts(B, 0);
      for (int b = 0; b < B; ++b)
        if (t < batch[b]->length()) acts[b] = batch[b]->actions[t][i];
      chosen[i].push_back(tape.gather_cols(q, std::move(acts)));
      q_pre[i].push_back(tape.value(q));
    }
  }

  // Target unroll (plain): per-agent max Q at each step.
  std::vector<std::vector<Eigen::MatrixXf>> max_next(n);
  for (int i = 0; i < n; ++i) {
    const auto& net = nets_[store_index(i)];
    const auto& target = targets_[store_index(i)];
    Eigen::MatrixXf hidden = Eigen::MatrixXf::Zero(B, hp_.hidden_dim);
    max_next[i].resize(t_max + 1);
    for (int t = 0; t <= t_max; ++t) {
      Eigen::MatrixXf q = net.forward(target, inputs[i][t],
                                      hp_.net_type == BodyKind::GRU ? &hidden : nullptr);
      max_next[i][t] = q.rowwise().maxCoeff();
    }
  }

  const float gamma = static_cast<float>(hp_.gamma);
  Var loss_sum = tape.constant(Eigen::MatrixXf::Zero(1, 1));

  if (alg_ == Algorithm::IQL) {
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < t_max; ++t) {
        Eigen::MatrixXf y =
            reward[t] +
            gamma * (Eigen::MatrixXf::Ones(B, 1) - done[t]).cwiseProduct(max_next[i][t + 1]);
        Var err = tape.cmul(tape.constant(mask[t]),
                            tape.sub(chosen[i][t], tape.constant(y)));
        loss_sum = tape.add(loss_sum, tape.sum(tape.square(err)));
      }
    }
    total_valid *= n;
  } else {
    for (int t = 0; t < t_max; ++t) {
      std::vector<Var> cols;
      for (int i = 0; i < n; ++i) cols.push_back(chosen[i][t]);
      Var qtot;
      Eigen::MatrixXf qtot_next(B, 1);
      if (alg_ == Algorithm::VDN) {
        qtot = mix_vdn(tape, tape.hstack(cols));
        qtot_next.setZero();
        for (int i = 0; i < n; ++i) qtot_next += max_next[i][t + 1];
      } else {
        qtot = mix_qmix(tape, mixer_, tape.hstack(cols), tape.constant(state[t]), qdims_,
                        /*trainable=*/true);
        Eigen::MatrixXf maxs(B, n);
        for (int i = 0; i < n; ++i) maxs.col(i) = max_next[i][t + 1];
        Var tgt = mix_qmix(tape, mixer_target_, tape.constant(maxs),
                           tape.constant(state[t + 1]), qdims_, /*trainable=*/false);
        qtot_next = tape.value(tgt);
      }
      Eigen::MatrixXf y =
          reward[t] +
          gamma * (Eigen::MatrixXf::Ones(B, 1) - done[t]).cwiseProduct(qtot_next);
      Var err = tape.cmul(tape.constant(mask[t]), tape.sub(qtot, tape.constant(y)));
      loss_sum = tape.add(loss_sum, tape.sum(tape.square(err)));
    }
  }

  Var loss = tape.scale(loss_sum, static_cast<float>(1.0 / std::max(total_valid, 1.0)));

  for (auto& s : stores_) s.zero_grad();
  mixer_.zero_grad();
  tape.backward_scalar(loss);

  std::vector<ParamStore<float>*> all;
  for (auto& s : stores_) all.push_back(&s);
  if (alg_ == Algorithm::QMIX) all.push_back(&mixer_);
  clip_global_norm(all, hp_.max_grad_norm);

  for (std::size_t k = 0; k < stores_.size(); ++k) optims_[k].step(stores_[k]);
  if (mixer_optim_) mixer_optim_->step(mixer_);

  ++learner_steps_;
  for (std::size_t k = 0; k < stores_.size(); ++k)
    target_update(stores_[k], targets_[k], hp_.target, learner_steps_);
  if (alg_ == Algorithm::QMIX)
    target_update(mixer_, mixer_target_, hp_.target, learner_steps_);

  // Diagnostics on the training batch: post-update policy vs the
  // pre-update snapshot, epsilon-greedy induced distributions.
  QTrainResult result;
  result.loss = tape.value(loss)(0, 0);
  for (int i = 0; i < n; ++i) {
    const auto& net = nets_[store_index(i)];
    const auto& store = stores_[store_index(i)];
    Eigen::MatrixXf hidden = Eigen::MatrixXf::Zero(B, hp_.hidden_dim);
    double ent = 0.0, div = 0.0, count = 0.0;
    for (int t = 0; t < t_max; ++t) {
      Eigen::MatrixXf q = net.forward(store, inputs[i][t],
                                      hp_.net_type == BodyKind::GRU ? &hidden : nullptr);
      for (int b = 0; b < B; ++b) {
        if (mask[t](b, 0) == 0.0f) continue;
        Eigen::VectorXd cur = extract_policy(
            LearnerKind::ValueBased, q.row(b).transpose().cast<double>(), diag_eps);
        Eigen::VectorXd old = extract_policy(
            LearnerKind::ValueBased, q_pre[i][t].row(b).transpose().cast<double>(),
            diag_eps);
        ent += policy_entropy(cur);
        div += update_divergence(cur, old);
        count += 1.0;
      }
    }
    result.entropy.push_back(ent / std::max(count, 1.0));
    result.divergence.push_back(div / std::max(count, 1.0));
  }
  return result;
}

ParamStore<float> QLearner::export_params() const {
  ParamStore<float> merged;
  auto copy_all = [&](const ParamStore<float>& from) {
    for (const auto& e : from.entries())
      merged.add(e.name, e.value.rows(), e.value.cols()) = e.value;
  };
  for (const auto& s : stores_) copy_all(s);
  if (alg_ == Algorithm::QMIX) copy_all(mixer_);
  return merged;
}

void QLearner::import_params(const ParamStore<float>& merged) {
  auto load_all = [&](ParamStore<float>& into) {
    for (auto& e : into.entries()) e.value = merged.at(e.name).value;
  };
  for (auto& s : stores_) load_all(s);
  if (alg_ == Algorithm::QMIX) load_all(mixer_);
  for (std::size_t k = 0; k < stores_.size(); ++k) targets_[k].copy_values_from(stores_[k]);
  if (alg_ == Algorithm::QMIX) mixer_target_.copy_values_from(mixer_);
}

} // namespace marlens
