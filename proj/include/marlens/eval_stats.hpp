#pragma once

#include <Eigen/Core>
#include <vector>

namespace marlens {

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-run evaluation time series: one row per evaluation point.
struct MetricSeries {
  std::vector<long> steps;                       // evaluation step indices
  std::vector<std::vector<double>> seed_returns; // per point, per seed
};

struct CurvePoint {
  long step = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Student-t confidence interval over seeds: mean +- t_{q,n-1} s/sqrt(n).
/// A single sample or zero variance collapses to (mean, mean, mean).
MeanCi mean_and_ci(const std::vector<double>& samples, double confidence = 0.95);

/// Min-max normalization within one task; a degenerate task (max ==
/// min) maps to all zeros.
std::vector<double> minmax_normalize(const std::vector<double>& scores);

/// P(x > y) over all cross-seed pairs, ties counted half. Computed as
/// 0.5 + (wins - losses) / (2 n m) so that poi(X, Y) + poi(Y, X) == 1
/// holds exactly in floating point.
double probability_of_improvement(const std::vector<double>& x,
                                  const std::vector<double>& y);

/// Mean of the per-task probability of improvement.
double probability_of_improvement(const std::vector<std::vector<double>>& x_per_task,
                                  const std::vector<std::vector<double>>& y_per_task);

/// Aggregated sample-efficiency curve: per task min-max normalize the
/// seed-by-point return matrix, average across tasks per seed, then
/// take the mean and CI across seeds at every evaluation point.
std::vector<CurvePoint> sample_efficiency_curve(
    const std::vector<long>& steps, const std::vector<Eigen::MatrixXd>& per_task,
    double confidence = 0.95);

/// Summary of one series with per-point CIs over seeds.
std::vector<CurvePoint> summarize(const MetricSeries& series, double confidence = 0.95);

/// Final score of a run: mean return over the last `window` points.
double final_score(const MetricSeries& series, int seed, int window = 10);

} // namespace marlens
