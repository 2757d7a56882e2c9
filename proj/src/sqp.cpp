#include "svrsqp/sqp.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "sqp_internal.hpp"

namespace svrsqp {

double merit_value(const Problem& problem, const Vector& x, double tau) {
  return tau * problem.objective(x) + problem.constraint(x).lpNorm<1>();
}

double model_reduction(double tau, const Vector& g, const Vector& d, const Vector& c) {
  return -tau * g.dot(d) + c.lpNorm<1>();
}

MeritUpdate update_merit_parameter(const MeritState& state, const Vector& g, const Vector& d,
                                   const Matrix& h, const Vector& c) {
  double curvature = std::max(d.dot(h * d), 0.0);
  double q = g.dot(d) + curvature;
  double c_l1 = c.lpNorm<1>();

  double tau_trial = std::numeric_limits<double>::infinity();
  if (q > 0.0) {
    if (c_l1 == 0.0) {
      // On the constraint manifold the two halves of q cancel exactly in real
      // arithmetic, so a small positive q is rounding residue, not a failed
      // subproblem solve. The residue is driven by the solve error in d,
      // which scales with the gradient, so the cutoff must not collapse as
      // the direction shrinks near a solution.
      if (q <= 1e-12 * (1.0 + g.norm()) * (1.0 + d.norm())) {
        return MeritUpdate{state.tau, tau_trial};
      }
      throw DegenerateDirection(
          "zero constraint violation with ascent curvature: the step does not solve the "
          "subproblem to tolerance");
    }
    tau_trial = (1.0 - state.sigma) * c_l1 / q;
  }

  double tau = state.tau <= tau_trial ? state.tau : (1.0 - state.eps_tau) * tau_trial;
  return MeritUpdate{tau, tau_trial};
}

double adaptive_step(const AdaptiveStep& rule, double tau, double delta_l, double d_norm_sq,
                     double c_l1) {
  assert(d_norm_sq > 0.0);
  double denom = (tau * rule.lipschitz + rule.gamma) * d_norm_sq;
  assert(denom > 0.0);

  double alpha_hat = std::min(delta_l / denom, rule.alpha_max) * rule.beta;
  double alpha_tilde = alpha_hat - 4.0 * c_l1 / denom;

  if (alpha_hat < 1.0) {
    return alpha_hat;
  }
  if (alpha_tilde <= 1.0) {
    return 1.0;
  }
  return alpha_tilde;
}

namespace detail {

namespace {

std::string at_iteration(int outer_k, int inner_s) {
  return " (outer " + std::to_string(outer_k) + ", inner " + std::to_string(inner_s) + ")";
}

}  // namespace

InnerStepResult inner_sqp_step(const Problem& problem, const Matrix& h, const SqpCoreParams& core,
                               int outer_k, int inner_s, const Vector& g_bar, Vector& x,
                               double& tau, const IterationObserver& observer) {
  Vector c = problem.constraint(x);
  Matrix j = problem.jacobian(x);

  KktSolution kkt;
  try {
    kkt = solve_kkt(h, j, g_bar, c);
  } catch (const RankDeficientJacobian& e) {
    throw RankDeficientJacobian(e.what() + at_iteration(outer_k, inner_s));
  } catch (const SingularKkt& e) {
    throw SingularKkt(e.what() + at_iteration(outer_k, inner_s));
  }

  double zero_threshold =
      1e-12 * (1.0 + g_bar.lpNorm<Eigen::Infinity>() + c.lpNorm<Eigen::Infinity>());
  if (kkt.d.lpNorm<Eigen::Infinity>() <= zero_threshold) {
    return InnerStepResult{0.0, true};
  }

  MeritState state{tau, core.sigma, core.eps_tau};
  MeritUpdate update;
  try {
    update = update_merit_parameter(state, g_bar, kkt.d, h, c);
  } catch (const DegenerateDirection& e) {
    throw DegenerateDirection(e.what() + at_iteration(outer_k, inner_s));
  }

  double curvature = std::max(kkt.d.dot(h * kkt.d), 0.0);
  double c_l1 = c.lpNorm<1>();
  double delta_l = model_reduction(update.tau, g_bar, kkt.d, c);
  if (delta_l < update.tau * curvature + core.sigma * c_l1 - 1e-10) {
    throw Error("merit model reduction guarantee violated" + at_iteration(outer_k, inner_s));
  }

  double alpha;
  if (const auto* constant = std::get_if<ConstantStep>(&core.step)) {
    alpha = constant->alpha;
  } else {
    alpha = adaptive_step(std::get<AdaptiveStep>(core.step), update.tau, delta_l,
                          kkt.d.squaredNorm(), c_l1);
  }

  Vector x_before;
  if (observer) {
    x_before = x;
  }
  double tau_before = tau;
  tau = update.tau;
  x += alpha * kkt.d;

  if (observer) {
    observer(IterationTrace{outer_k, inner_s, std::move(x_before), x, g_bar, kkt.d, kkt.y,
                            std::move(c), tau_before, update.tau_trial, update.tau, curvature,
                            delta_l, alpha});
  }
  return InnerStepResult{alpha, false};
}

IterateRecord make_record(const Problem& problem, const Vector& x, double epoch, int outer_k,
                          int inner_s, double tau, double alpha) {
  IterateRecord row;
  row.epoch = epoch;
  row.outer_k = outer_k;
  row.inner_s = inner_s;
  row.feasibility_inf = problem.constraint(x).lpNorm<Eigen::Infinity>();
  row.stationarity_inf = stationarity_error(problem, x);
  row.merit = merit_value(problem, x, tau);
  row.tau = tau;
  row.step = alpha;
  return row;
}

}  // namespace detail

RunLog run_svr_sqp(const Problem& problem, const SvrSqpConfig& config, Rng rng,
                   const IterationObserver& observer) {
  const int n = problem.dimension();
  const int count = problem.num_components();
  assert(config.x_init.size() == n);
  assert(config.batch_size >= 1 && config.batch_size <= count);
  assert(config.inner_length >= 1);

  Matrix h = config.core.hessian ? *config.core.hessian : Matrix(Matrix::Identity(n, n));
  Vector x = config.x_init;
  double tau = config.core.tau_init;

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
      detail::InnerStepResult step =
          detail::inner_sqp_step(problem, h, config.core, outer_k, inner_s, g_bar, x, tau,
                                 observer);
      if (!x.allFinite()) {
        return log;  // overflowed; later metrics would be undefined
      }
      log.push_back(
          detail::make_record(problem, x, counter.epochs(), outer_k, inner_s, tau, step.alpha));
      if (counter.epochs() >= config.epoch_budget) {
        return log;
      }
    }
    ++outer_k;
  }
  return log;
}

}  // namespace svrsqp
