#include "marlens/eval_stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>

namespace marlens {

MeanCi mean_and_ci(const std::vector<double>& samples, double confidence) {
  if (samples.empty()) throw std::invalid_argument("mean_and_ci: no samples");
  const auto n = samples.size();
  double sum = 0.0;
  for (double s : samples) sum += s;
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, mean, mean};
  double sq = 0.0;
  for (double s : samples) sq += (s - mean) * (s - mean);
  const double sd = std::sqrt(sq / static_cast<double>(n - 1));
  if (sd == 0.0) return {mean, mean, mean};
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  const double half = t * sd / std::sqrt(static_cast<double>(n));
  return {mean, mean - half, mean + half};
}

std::vector<double> minmax_normalize(const std::vector<double>& scores) {
  if (scores.empty()) return {};
  double lo = scores[0], hi = scores[0];
  for (double s : scores) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::vector<double> out(scores.size(), 0.0);
  if (hi == lo) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - lo) / (hi - lo);
  return out;
}

double probability_of_improvement(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.empty() || y.empty())
    throw std::invalid_argument("probability_of_improvement: empty score set");
  long wins = 0, losses = 0;
  for (double a : x)
    for (double b : y) {
      if (a > b) ++wins;
      else if (a < b) ++losses;
    }
  const double pairs = static_cast<double>(x.size()) * static_cast<double>(y.size());
  return 0.5 + static_cast<double>(wins - losses) / (2.0 * pairs);
}

double probability_of_improvement(const std::vector<std::vector<double>>& x_per_task,
                                  const std::vector<std::vector<double>>& y_per_task) {
  if (x_per_task.size() != y_per_task.size() || x_per_task.empty())
    throw std::invalid_argument("probability_of_improvement: task lists differ");
  double sum = 0.0;
  for (std::size_t t = 0; t < x_per_task.size(); ++t)
    sum += probability_of_improvement(x_per_task[t], y_per_task[t]);
  return sum / static_cast<double>(x_per_task.size());
}

std::vector<CurvePoint> sample_efficiency_curve(
    const std::vector<long>& steps, const std::vector<Eigen::MatrixXd>& per_task,
    double confidence) {
  if (per_task.empty()) throw std::invalid_argument("sample_efficiency_curve: no tasks");
  const Eigen::Index n_seeds = per_task[0].rows();
  const Eigen::Index n_points = per_task[0].cols();
  if (static_cast<Eigen::Index>(steps.size()) != n_points)
    throw std::invalid_argument("sample_efficiency_curve: step count mismatch");

  // Normalize each task over all of its values, then average tasks.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_seeds, n_points);
  for (const auto& task : per_task) {
    if (task.rows() != n_seeds || task.cols() != n_points)
      throw std::invalid_argument("sample_efficiency_curve: ragged task matrix");
    const double lo = task.minCoeff(), hi = task.maxCoeff();
    if (hi > lo) acc += (task.array() - lo).matrix() / (hi - lo);
  }
  acc /= static_cast<double>(per_task.size());

  std::vector<CurvePoint> curve(n_points);
  std::vector<double> col(n_seeds);
  for (Eigen::Index p = 0; p < n_points; ++p) {
    for (Eigen::Index s = 0; s < n_seeds; ++s) col[s] = acc(s, p);
    const MeanCi ci = mean_and_ci(col, confidence);
    curve[p] = {steps[p], ci.mean, ci.lo, ci.hi};
  }
  return curve;
}

std::vector<CurvePoint> summarize(const MetricSeries& series, double confidence) {
  std::vector<CurvePoint> out(series.steps.size());
  for (std::size_t p = 0; p < series.steps.size(); ++p) {
    const MeanCi ci = mean_and_ci(series.seed_returns[p], confidence);
    out[p] = {series.steps[p], ci.mean, ci.lo, ci.hi};
  }
  return out;
}

double final_score(const MetricSeries& series, int seed, int window) {
  const auto n = static_cast<int>(series.steps.size());
  const int take = std::min(window, n);
  double sum = 0.0;
  for (int p = n - take; p < n; ++p) sum += series.seed_returns[p][seed];
  return sum / static_cast<double>(take);
}

} // namespace marlens
