#pragma once

#include "svrsqp/sqp.hpp"

namespace svrsqp {

struct MinibatchSqpConfig {
  Vector x_init;
  SqpCoreParams core;
  int batch_size = 16;
  double epoch_budget = 30.0;
  SamplingMode sampling = SamplingMode::kWithReplacement;
};

/// Stochastic SQP without variance reduction: a single flat loop whose
/// gradient estimate is the plain minibatch mean (one batch of evaluations
/// per iteration, no reference point). Everything else (KKT step, merit
/// update, step rules, records, budget handling) matches run_svr_sqp; records
/// carry outer_k = 0 and inner_s = the iteration index.
RunLog run_minibatch_sqp(const Problem& problem, const MinibatchSqpConfig& config, Rng rng,
                         const IterationObserver& observer = {});

struct StoSubgradVrConfig {
  Vector x_init;
  double tau = 0.1;        // fixed merit parameter
  double alpha = 1.0;      // scale for the fixed step length
  double lipschitz = 1.0;  // gradient Lipschitz estimate L
  double gamma = 0.0;      // constraint-gradient Lipschitz constant
  int batch_size = 16;
  int inner_length = 1;
  double epoch_budget = 30.0;
  SamplingMode sampling = SamplingMode::kWithReplacement;
  bool cache_reference_gradients = false;
};

/// Variance-reduced stochastic subgradient descent on the merit function
/// tau f + ‖c‖₁: x ← x - α̂ (tau ḡ + Jᵀ sign(c)) with the fixed step length
/// α̂ = alpha / (tau L + gamma), sign(0) = 0, and ḡ the same variance-reduced
/// estimate run_svr_sqp uses. No KKT system is ever solved and the merit
/// parameter never changes. Same outer/inner structure, records, and budget
/// handling as run_svr_sqp.
RunLog run_sto_subgrad_vr(const Problem& problem, const StoSubgradVrConfig& config, Rng rng);

}  // namespace svrsqp
