#pragma once

#include "marlens/tape.hpp"

#include <vector>

namespace marlens {

/// Truncated n-step return targets.
///
/// rewards, dones: length T; values: length T+1 (bootstrap estimates,
/// typically from the target critic). For each t the discounted sum
/// runs over min(n, T-t) rewards, stops at the first done (dropping
/// the bootstrap), and otherwise bootstraps with gamma^m values[t+m].
template <class S>
std::vector<S> n_step_returns(const std::vector<S>& rewards, const std::vector<S>& values,
                              const std::vector<bool>& dones, S gamma, int n) {
  const int T = static_cast<int>(rewards.size());
  if (static_cast<int>(values.size()) != T + 1 || static_cast<int>(dones.size()) != T)
    throw ShapeMismatch("n_step_returns input lengths");
  std::vector<S> g(T);
  for (int t = 0; t < T; ++t) {
    S acc = S(0), disc = S(1);
    bool terminated = false;
    int m = 0;
    for (; m < n && t + m < T; ++m) {
      acc += disc * rewards[t + m];
      disc *= gamma;
      if (dones[t + m]) {
        terminated = true;
        ++m;
        break;
      }
    }
    if (!terminated) acc += disc * values[t + m];
    g[t] = acc;
  }
  return g;
}

/// Critic input: the agent's own observation for independent critics,
/// the concatenation of all agents' observations (canonical agent
/// order) for centralized ones.
template <class S>
VectorX<S> critic_input(bool centralized, int agent,
                        const std::vector<VectorX<S>>& per_agent_obs) {
  if (!centralized) return per_agent_obs[agent];
  Eigen::Index total = 0;
  for (const auto& o : per_agent_obs) total += o.size();
  VectorX<S> joint(total);
  Eigen::Index at = 0;
  for (const auto& o : per_agent_obs) {
    joint.segment(at, o.size()) = o;
    at += o.size();
  }
  return joint;
}

template <class S>
struct PgLossResult {
  Var total;
  S policy_loss = S(0);
  S value_loss = S(0);
  S entropy = S(0);
};

namespace detail {
template <class S>
Var entropy_mean(Tape<S>& tape, Var log_probs) {
  Var p = tape.exp_(log_probs);
  Var per_row = tape.neg(tape.sum_rows(tape.cmul(p, log_probs)));
  return tape.mean_all(per_row);
}
} // namespace detail

/// A2C loss on a flat batch (one row per decision): policy term with
/// the advantage detached, squared value error, entropy bonus.
/// total = policy + value - entropy_coef * entropy.
template <class S>
PgLossResult<S> a2c_loss(Tape<S>& tape, Var logits, const std::vector<int>& actions,
                         const MatrixX<S>& advantages, Var values,
                         const MatrixX<S>& returns, S entropy_coef) {
  Var lp = tape.log_softmax_rows(logits);
  Var lp_taken = tape.gather_cols(lp, actions);
  Var policy = tape.neg(tape.mean_all(tape.cmul(tape.constant(advantages), lp_taken)));
  Var value = tape.mean_all(tape.square(tape.sub(values, tape.constant(returns))));
  Var entropy = detail::entropy_mean(tape, lp);
  Var total = tape.add(tape.add(policy, value), tape.scale(entropy, -entropy_coef));
  return {total, tape.value(policy)(0, 0), tape.value(value)(0, 0),
          tape.value(entropy)(0, 0)};
}

/// Clipped-surrogate PPO loss. old_log_probs holds log pi_old of the
/// taken actions (one per row, detached).
template <class S>
PgLossResult<S> ppo_loss(Tape<S>& tape, Var logits, const std::vector<int>& actions,
                         const MatrixX<S>& old_log_probs, const MatrixX<S>& advantages,
                         Var values, const MatrixX<S>& returns, S clip, S entropy_coef) {
  Var lp = tape.log_softmax_rows(logits);
  Var lp_taken = tape.gather_cols(lp, actions);
  Var ratio = tape.exp_(tape.sub(lp_taken, tape.constant(old_log_probs)));
  Var adv = tape.constant(advantages);
  Var surrogate = tape.cmin(tape.cmul(ratio, adv),
                            tape.cmul(tape.clamp(ratio, S(1) - clip, S(1) + clip), adv));
  Var policy = tape.neg(tape.mean_all(surrogate));
  Var value = tape.mean_all(tape.square(tape.sub(values, tape.constant(returns))));
  Var entropy = detail::entropy_mean(tape, lp);
  Var total = tape.add(tape.add(policy, value), tape.scale(entropy, -entropy_coef));
  return {total, tape.value(policy)(0, 0), tape.value(value)(0, 0),
          tape.value(entropy)(0, 0)};
}

} // namespace marlens
