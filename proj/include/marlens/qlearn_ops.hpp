#pragma once

#include "marlens/params.hpp"
#include "marlens/rng.hpp"
#include "marlens/tape.hpp"

#include <string>
#include <vector>

namespace marlens {

/// Linear epsilon decay from start to end over decay_steps.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_steps = 50000;

  double at(long step) const {
    if (step >= decay_steps) return end;
    return start + (end - start) * static_cast<double>(step) /
                       static_cast<double>(decay_steps);
  }
};

/// Epsilon-greedy over one agent's Q row; ties break to the lowest
/// action index.
template <class S>
int select_action(const Eigen::Ref<const Eigen::Matrix<S, Eigen::Dynamic, 1>>& q,
                  double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return rng.uniform_int(static_cast<int>(q.size()));
  int best = 0;
  for (int a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

/// VDN joint value: exact sum of the chosen per-agent Qs.
template <class S>
S mix_vdn(const std::vector<S>& chosen_q) {
  S total = S(0);
  for (S q : chosen_q) total += q;
  return total;
}

template <class S>
Var mix_vdn(Tape<S>& tape, Var chosen_q /* B x n */) {
  return tape.sum_rows(chosen_q);
}

/// Monotonic QMIX mixer. Parameters (owned by `mixer`, created by
/// init_qmix_mixer): hypernetworks conditioned on the global state
/// produce the two mixing layers; the mixing weights pass through an
/// absolute value so dQ_tot/dQ_i >= 0.
struct QmixDims {
  int n_agents = 0;
  int state_dim = 0;
  int embed_dim = 32;
  int hypernet_dim = 64;
};

template <class S>
void init_qmix_mixer(ParamStore<S>& mixer, const QmixDims& d, Rng& rng) {
  const double g = std::sqrt(2.0);
  auto dense = [&](const std::string& name, int in, int out) {
    mixer.add(name + ".w", in, out) = orthogonal_init<S>(in, out, g, rng);
    mixer.add(name + ".b", 1, out);
  };
  dense("mix.hw1.0", d.state_dim, d.hypernet_dim);
  dense("mix.hw1.1", d.hypernet_dim, d.n_agents * d.embed_dim);
  dense("mix.hb1", d.state_dim, d.embed_dim);
  dense("mix.hw2.0", d.state_dim, d.hypernet_dim);
  dense("mix.hw2.1", d.hypernet_dim, d.embed_dim);
  dense("mix.hb2.0", d.state_dim, d.embed_dim);
  dense("mix.hb2.1", d.embed_dim, 1);
}

namespace detail {
template <class S>
Var mixer_param(Tape<S>& tape, ParamStore<S>& store, const std::string& name,
                bool trainable) {
  auto& e = store.at(name);
  return trainable ? tape.leaf(e.value, &e.grad) : tape.constant(e.value);
}

template <class S>
Var mixer_affine(Tape<S>& tape, ParamStore<S>& store, Var x, const std::string& name,
                 bool trainable) {
  return tape.add_rowvec(tape.matmul(x, mixer_param(tape, store, name + ".w", trainable)),
                         mixer_param(tape, store, name + ".b", trainable));
}
} // namespace detail

/// chosen_q: B x n agent values, state: B x state_dim. Returns B x 1.
template <class S>
Var mix_qmix(Tape<S>& tape, ParamStore<S>& mixer, Var chosen_q, Var state,
             const QmixDims& d, bool trainable = true) {
  using detail::mixer_affine;
  if (tape.cols(chosen_q) != d.n_agents || tape.cols(state) != d.state_dim)
    throw ShapeMismatch("mix_qmix input widths");
  Var w1 = tape.abs_(mixer_affine(
      tape, mixer, tape.relu(mixer_affine(tape, mixer, state, "mix.hw1.0", trainable)),
      "mix.hw1.1", trainable));
  Var b1 = mixer_affine(tape, mixer, state, "mix.hb1", trainable);
  Var hidden = tape.relu(tape.rowwise_linear(chosen_q, w1, b1));
  Var w2 = tape.abs_(mixer_affine(
      tape, mixer, tape.relu(mixer_affine(tape, mixer, state, "mix.hw2.0", trainable)),
      "mix.hw2.1", trainable));
  Var b2 = mixer_affine(
      tape, mixer, tape.relu(mixer_affine(tape, mixer, state, "mix.hb2.0", trainable)),
      "mix.hb2.1", trainable);
  return tape.rowwise_linear(hidden, w2, b2);
}

/// Running standardizer for team rewards (Welford). Training-time
/// only: raw rewards stay in the replay buffer.
class RewardStandardizer {
 public:
  void observe(double r) {
    ++count_;
    const double delta = r - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (r - mean_);
  }
  double standardize(double r) const {
    if (count_ < 2) return 0.0;
    return (r - mean_) / std();
  }
  double mean() const { return mean_; }
  double std() const {
    if (count_ < 2) return 1.0;
    return std::max(std::sqrt(m2_ / static_cast<double>(count_ - 1)), 1e-6);
  }
  long count() const { return count_; }

 private:
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

} // namespace marlens
