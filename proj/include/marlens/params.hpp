#pragma once

#include "marlens/tape.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace marlens {

struct NonFiniteGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Named parameter arrays with matching gradient slots. Shapes are
/// fixed at add() time. Single-writer: only the learner mutates.
template <class S>
class ParamStore {
 public:
  using Mat = MatrixX<S>;

  struct Entry {
    std::string name;
    Mat value;
    Mat grad;
  };

  Mat& add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name)) throw std::logic_error("duplicate parameter: " + name);
    index_[name] = entries_.size();
    entries_.push_back({name, Mat::Zero(rows, cols), Mat::Zero(rows, cols)});
    return entries_.back().value;
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Entry& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
    return entries_[it->second];
  }
  const Entry& at(const std::string& name) const {
    return const_cast<ParamStore*>(this)->at(name);
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

  void zero_grad() {
    for (auto& e : entries_) e.grad.setZero();
  }

  long step_count() const { return step_count_; }
  void bump_step() { ++step_count_; }

  /// Deep copy used for target networks and policy snapshots.
  ParamStore clone() const { return *this; }

  void copy_values_from(const ParamStore& other) {
    if (other.entries_.size() != entries_.size())
      throw ShapeMismatch("param store layouts differ");
    for (std::size_t i = 0; i < entries_.size(); ++i)
      entries_[i].value = other.entries_[i].value;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  long step_count_ = 0;
};

/// Scales all gradients so the global L2 norm does not exceed
/// max_norm. Idempotent. Norm accumulated in double.
template <class S>
double clip_global_norm(ParamStore<S>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& e : params.entries())
    sq += e.grad.template cast<double>().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const S k = static_cast<S>(max_norm / norm);
    for (auto& e : params.entries()) e.grad *= k;
  }
  return norm;
}

/// Joint clip across several stores, treating them as one parameter
/// vector.
template <class S>
double clip_global_norm(const std::vector<ParamStore<S>*>& stores, double max_norm) {
  double sq = 0.0;
  for (const auto* p : stores)
    for (const auto& e : p->entries()) sq += e.grad.template cast<double>().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const S k = static_cast<S>(max_norm / norm);
    for (auto* p : stores)
      for (auto& e : p->entries()) e.grad *= k;
  }
  return norm;
}

/// Adam with bias correction. Moment buffers are keyed by parameter
/// name and allocated on first step.
template <class S>
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore<S>& params) {
    for (const auto& e : params.entries())
      if (!e.grad.allFinite())
        throw NonFiniteGradient("non-finite gradient in " + e.name);

    params.bump_step();
    const long t = params.step_count();
    const double bc1 = 1.0 - std::pow(beta1_, t);
    const double bc2 = 1.0 - std::pow(beta2_, t);
    for (auto& e : params.entries()) {
      auto& m = moments_[e.name];
      if (m.m.size() == 0) {
        m.m = MatrixX<S>::Zero(e.value.rows(), e.value.cols());
        m.v = MatrixX<S>::Zero(e.value.rows(), e.value.cols());
      }
      m.m = static_cast<S>(beta1_) * m.m + static_cast<S>(1.0 - beta1_) * e.grad;
      m.v = (static_cast<S>(beta2_) * m.v.array() +
             static_cast<S>(1.0 - beta2_) * e.grad.array().square())
                .matrix();
      const auto mhat = m.m.array() / static_cast<S>(bc1);
      const auto vhat = m.v.array() / static_cast<S>(bc2);
      e.value.array() -= static_cast<S>(lr_) * mhat / (vhat.sqrt() + static_cast<S>(eps_));
    }
  }

  double lr() const { return lr_; }

 private:
  struct Moments {
    MatrixX<S> m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, Moments> moments_;
};

enum class TargetMode { Hard, Soft };

struct TargetUpdate {
  TargetMode mode = TargetMode::Hard;
  long interval = 200; // learner steps between hard copies
  double tau = 0.01;   // soft blend factor
};

/// Hard mode copies online into target every `interval` learner steps
/// (learner_step counts completed updates, 1-based). Soft mode blends
/// every call.
template <class S>
void target_update(const ParamStore<S>& online, ParamStore<S>& target,
                   const TargetUpdate& cfg, long learner_step) {
  if (cfg.mode == TargetMode::Hard) {
    if (learner_step % cfg.interval == 0) target.copy_values_from(online);
  } else {
    const S tau = static_cast<S>(cfg.tau);
    auto& te = target.entries();
    const auto& oe = online.entries();
    if (te.size() != oe.size()) throw ShapeMismatch("target/online layouts differ");
    for (std::size_t i = 0; i < te.size(); ++i)
      te[i].value = (S(1) - tau) * te[i].value + tau * oe[i].value;
  }
}

} // namespace marlens
