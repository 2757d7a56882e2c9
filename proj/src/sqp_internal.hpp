#pragma once

#include "svrsqp/metrics.hpp"
#include "svrsqp/sqp.hpp"

namespace svrsqp::detail {

struct InnerStepResult {
  double alpha = 0.0;
  bool skipped = false;
};

/// One SQP iteration on (x, tau) in place: KKT solve, zero-direction test,
/// merit parameter update, step selection, iterate update. Observer runs only
/// for non-skipped steps. Errors are rethrown with (outer, inner) attached.
InnerStepResult inner_sqp_step(const Problem& problem, const Matrix& h, const SqpCoreParams& core,
                               int outer_k, int inner_s, const Vector& g_bar, Vector& x,
                               double& tau, const IterationObserver& observer);

/// Trajectory row for the current iterate. Metric evaluations are pure reads
/// and charge nothing.
IterateRecord make_record(const Problem& problem, const Vector& x, double epoch, int outer_k,
                          int inner_s, double tau, double alpha);

}  // namespace svrsqp::detail
