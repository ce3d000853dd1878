#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace marlens {

struct EmptyLog : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-agent categorical distributions over the action set.
using PolicyDistribution = std::vector<Eigen::VectorXd>;

/// Per-update training diagnostics: per-agent entropy and divergence
/// from the previous policy snapshot, plus team means.
struct DiagnosticsRecord {
  long step = 0;
  std::vector<double> entropy;
  std::vector<double> divergence;
  double mean_entropy = 0.0;
  double mean_divergence = 0.0;
};

enum class TaskSwitchMode { RawCounts, FrequencyNormalized };

/// Softmax over each agent's cumulative action counts during an
/// evaluation phase. RawCounts applies the softmax to raw counts;
/// FrequencyNormalized divides the counts by the number of steps
/// first, avoiding saturation on long evaluations.
struct TaskSwitchProfile {
  std::vector<Eigen::VectorXd> counts;     // per agent, length |A|
  std::vector<Eigen::VectorXd> likelihood; // softmax output, sums to 1
  TaskSwitchMode mode = TaskSwitchMode::RawCounts;
};

/// Shannon entropy -sum p ln p, with 0 ln 0 := 0.
double policy_entropy(const Eigen::VectorXd& dist);

/// Cross-entropy H(current, old) minus entropy H(current); both
/// distributions are clamped below at 1e-8 before taking logs.
double update_divergence(const Eigen::VectorXd& current, const Eigen::VectorXd& old);

enum class LearnerKind { ValueBased, PolicyGradient };

/// Policy induced by the learner's raw network outputs: softmax over
/// logits for policy-gradient learners, the epsilon-greedy categorical
/// distribution over Q-values for value-based ones (ties break to the
/// lowest action index).
Eigen::VectorXd extract_policy(LearnerKind kind, const Eigen::VectorXd& net_output,
                               double evaluation_epsilon);

TaskSwitchProfile task_switch_profile(const std::vector<std::vector<int>>& action_log,
                                      int n_actions,
                                      TaskSwitchMode mode = TaskSwitchMode::RawCounts);

double mean_over_agents(const std::vector<double>& values);

} // namespace marlens
