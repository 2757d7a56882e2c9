#include "svrsqp/metrics.hpp"

#include <cassert>
#include <cmath>

#include "svrsqp/linalg.hpp"

namespace svrsqp {

namespace {

constexpr double kFeasibleThreshold = 1e-6;

MeanHalfwidth mean_halfwidth(const std::vector<double>& values) {
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) {
    mean += v;
  }
  mean /= count;
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  double sd = std::sqrt(ss / (count - 1.0));
  return MeanHalfwidth{mean, 1.96 * sd / std::sqrt(count)};
}

}  // namespace

double stationarity_error(const Problem& problem, const Vector& x) {
  Vector g = problem.full_gradient(x);
  Matrix j = problem.jacobian(x);
  Vector y = least_squares_multipliers(j, g);
  return (g + j.transpose() * y).lpNorm<Eigen::Infinity>();
}

BestIterate select_best(const RunLog& log) {
  assert(!log.empty());

  std::size_t best = log.size();
  bool any_feasible = false;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].feasibility_inf <= kFeasibleThreshold) {
      if (!any_feasible) {
        any_feasible = true;
        best = log.size();
      }
      if (best == log.size() || log[i].stationarity_inf < log[best].stationarity_inf) {
        best = i;
      }
    } else if (!any_feasible) {
      if (best == log.size() || log[i].feasibility_inf < log[best].feasibility_inf) {
        best = i;
      }
    }
  }
  return BestIterate{best, log[best].feasibility_inf, log[best].stationarity_inf};
}

AggregateSummary aggregate(const std::vector<BestIterate>& runs) {
  if (runs.size() < 2) {
    throw InsufficientRuns("aggregation needs at least two runs, got " +
                           std::to_string(runs.size()));
  }
  std::vector<double> feas, stat;
  feas.reserve(runs.size());
  stat.reserve(runs.size());
  for (const BestIterate& run : runs) {
    feas.push_back(run.feasibility_inf);
    stat.push_back(run.stationarity_inf);
  }
  return AggregateSummary{mean_halfwidth(feas), mean_halfwidth(stat), runs.size()};
}

}  // namespace svrsqp
