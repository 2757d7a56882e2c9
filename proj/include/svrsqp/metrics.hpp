#pragma once

#include <cstddef>
#include <vector>

#include "svrsqp/problems.hpp"

namespace svrsqp {

/// One row of a run trajectory, captured after each inner iteration.
struct IterateRecord {
  double epoch = 0.0;  // gradient work consumed so far, in epochs
  int outer_k = 0;
  int inner_s = 0;
  double feasibility_inf = 0.0;   // ‖c(x)‖∞
  double stationarity_inf = 0.0;  // ‖∇f(x) + J(x)ᵀ y_ls‖∞
  double merit = 0.0;             // τ f(x) + ‖c(x)‖₁
  double tau = 0.0;
  double step = 0.0;
};

using RunLog = std::vector<IterateRecord>;

/// ‖∇f(x) + J(x)ᵀ y‖∞ with y the least-squares multipliers at x. Throws
/// RankDeficientJacobian where the multipliers are not defined.
double stationarity_error(const Problem& problem, const Vector& x);

struct BestIterate {
  std::size_t index = 0;
  double feasibility_inf = 0.0;
  double stationarity_inf = 0.0;
};

/// Best-iterate rule over a nonempty log: if no record reaches feasibility
/// 1e-6, pick the most feasible record; otherwise pick the record with the
/// smallest stationarity error among those with feasibility at most 1e-6.
/// Ties go to the earliest record.
BestIterate select_best(const RunLog& log);

struct MeanHalfwidth {
  double mean = 0.0;
  double halfwidth95 = 0.0;  // 1.96 · sd / sqrt(R), sample standard deviation
};

struct AggregateSummary {
  MeanHalfwidth feasibility;
  MeanHalfwidth stationarity;
  std::size_t runs = 0;
};

/// Mean and 95% halfwidth of the best-iterate metrics across runs. Throws
/// InsufficientRuns for fewer than two runs.
AggregateSummary aggregate(const std::vector<BestIterate>& runs);

}  // namespace svrsqp
