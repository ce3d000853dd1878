#include "marlens/diagnostics.hpp"

#include "marlens/tape.hpp"

#include <cmath>

namespace marlens {

namespace {
constexpr double kProbFloor = 1e-8;

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  Eigen::VectorXd e = (v.array() - m).exp();
  return e / e.sum();
}
} // namespace

double policy_entropy(const Eigen::VectorXd& dist) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist[i] > 0.0) h -= dist[i] * std::log(dist[i]);
  return h;
}

double update_divergence(const Eigen::VectorXd& current, const Eigen::VectorXd& old) {
  if (current.size() != old.size())
    throw ShapeMismatch("update_divergence: action sets differ in size");
  double cross = 0.0, self = 0.0;
  for (Eigen::Index i = 0; i < current.size(); ++i) {
    const double p = std::max(current[i], kProbFloor);
    const double q = std::max(old[i], kProbFloor);
    cross -= current[i] * std::log(q);
    self -= current[i] * std::log(p);
  }
  return cross - self;
}

Eigen::VectorXd extract_policy(LearnerKind kind, const Eigen::VectorXd& net_output,
                               double evaluation_epsilon) {
  if (kind == LearnerKind::PolicyGradient) return softmax(net_output);
  const auto n = net_output.size();
  Eigen::Index best = 0;
  net_output.maxCoeff(&best); // Eigen reports the first maximum
  Eigen::VectorXd dist =
      Eigen::VectorXd::Constant(n, evaluation_epsilon / static_cast<double>(n));
  dist[best] += 1.0 - evaluation_epsilon;
  return dist;
}

TaskSwitchProfile task_switch_profile(const std::vector<std::vector<int>>& action_log,
                                      int n_actions, TaskSwitchMode mode) {
  if (action_log.empty()) throw EmptyLog("task_switch_profile: no agents");
  TaskSwitchProfile profile;
  profile.mode = mode;
  for (const auto& actions : action_log) {
    if (actions.empty()) throw EmptyLog("task_switch_profile: empty action log");
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_actions);
    for (int a : actions) counts[a] += 1.0;
    Eigen::VectorXd scores = counts;
    if (mode == TaskSwitchMode::FrequencyNormalized)
      scores /= static_cast<double>(actions.size());
    profile.counts.push_back(std::move(counts));
    profile.likelihood.push_back(softmax(scores));
  }
  return profile;
}

double mean_over_agents(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

} // namespace marlens
