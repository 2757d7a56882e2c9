#include "svrsqp/baselines.hpp"

#include <cassert>

#include "sqp_internal.hpp"

namespace svrsqp {

RunLog run_minibatch_sqp(const Problem& problem, const MinibatchSqpConfig& config, Rng rng,
                         const IterationObserver& observer) {
  const int n = problem.dimension();
  const int count = problem.num_components();
  assert(config.x_init.size() == n);
  assert(config.batch_size >= 1 && config.batch_size <= count);

  Matrix h = config.core.hessian ? *config.core.hessian : Matrix(Matrix::Identity(n, n));
  Vector x = config.x_init;
  double tau = config.core.tau_init;

  EvalCounter counter(count);
  BatchSampler sampler(count, config.batch_size, config.sampling, rng.split(kStreamBatch));

  RunLog log;
  for (int t = 0; counter.epochs() < config.epoch_budget; ++t) {
    std::vector<int> batch = sampler.sample(0, t);
    Vector g_bar = minibatch_gradient(problem, x, batch, counter);
    detail::InnerStepResult step =
        detail::inner_sqp_step(problem, h, config.core, 0, t, g_bar, x, tau, observer);
    if (!x.allFinite()) {
      return log;
    }
    log.push_back(detail::make_record(problem, x, counter.epochs(), 0, t, tau, step.alpha));
  }
  return log;
}

RunLog run_sto_subgrad_vr(const Problem& problem, const StoSubgradVrConfig& config, Rng rng) {
  const int n = problem.dimension();
  const int count = problem.num_components();
  assert(config.x_init.size() == n);
  assert(config.batch_size >= 1 && config.batch_size <= count);
  assert(config.inner_length >= 1);

  Vector x = config.x_init;
  const double step_length = config.alpha / (config.tau * config.lipschitz + config.gamma);

  EvalCounter counter(count);
  BatchSampler sampler(count, config.batch_size, config.sampling, rng.split(kStreamBatch));
  ReferenceGradientCache cache;
  ReferenceGradientCache* cache_ptr = config.cache_reference_gradients ? &cache : nullptr;

  RunLog log;
  int outer_k = 0;
  while (counter.epochs() < config.epoch_budget) {
    Vector x_ref = x;
    Vector g_ref = full_gradient_counted(problem, x_ref, counter, cache_ptr);
    if (counter.epochs() >= config.epoch_budget) {
      break;
    }
    for (int inner_s = 0; inner_s < config.inner_length; ++inner_s) {
      std::vector<int> batch = sampler.sample(outer_k, inner_s);
      Vector g_bar = svrg_gradient(problem, x, x_ref, g_ref, batch, counter, cache_ptr);

      Vector c = problem.constraint(x);
      Vector sign_c = c.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      Vector subgradient = config.tau * g_bar + problem.jacobian(x).transpose() * sign_c;
      x -= step_length * subgradient;

      if (!x.allFinite()) {
        return log;
      }
      log.push_back(detail::make_record(problem, x, counter.epochs(), outer_k, inner_s, config.tau,
                                        step_length));
      if (counter.epochs() >= config.epoch_budget) {
        return log;
      }
    }
    ++outer_k;
  }
  return log;
}

}  // namespace svrsqp
