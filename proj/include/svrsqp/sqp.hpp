#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "svrsqp/gradients.hpp"
#include "svrsqp/linalg.hpp"
#include "svrsqp/metrics.hpp"
#include "svrsqp/problems.hpp"
#include "svrsqp/rng.hpp"

namespace svrsqp {

/// Merit function parameters. tau scales the objective against the l1
/// constraint violation.
struct MeritState {
  double tau = 0.1;
  double sigma = 0.5;
  double eps_tau = 1e-6;
};

/// Fixed step length (scaled by nothing further).
struct ConstantStep {
  double alpha = 1.0;
};

/// Adaptive step length driven by the model reduction, a gradient Lipschitz
/// estimate, and the constraint-gradient Lipschitz constant gamma.
struct AdaptiveStep {
  double beta = 1.0;
  double alpha_max = 1e6;
  double lipschitz = 1.0;
  double gamma = 0.0;
};

using StepRule = std::variant<ConstantStep, AdaptiveStep>;

/// tau f(x) + ‖c(x)‖₁.
double merit_value(const Problem& problem, const Vector& x, double tau);

/// Reduction of the merit model at step d: -tau gᵀd + ‖c‖₁.
double model_reduction(double tau, const Vector& g, const Vector& d, const Vector& c);

struct MeritUpdate {
  double tau = 0.0;        // new merit parameter
  double tau_trial = 0.0;  // +inf when the curvature test passes at any tau
};

/// Trial value: tau_trial = +inf if gᵀd + max{dᵀHd, 0} <= 0, otherwise
/// (1 - sigma) ‖c‖₁ / (gᵀd + max{dᵀHd, 0}). The parameter is kept when it is
/// already at most the trial value and otherwise cut to (1 - eps_tau) times
/// the trial value, so it never increases. Throws DegenerateDirection when
/// ‖c‖₁ = 0 with positive curvature term, which a consistent KKT solve rules
/// out.
MeritUpdate update_merit_parameter(const MeritState& state, const Vector& g, const Vector& d,
                                   const Matrix& h, const Vector& c);

/// Step length for the adaptive rule. With denom = (tau L + gamma)‖d‖₂²:
/// alpha_hat = min{delta_l / denom, alpha_max} · beta and
/// alpha_tilde = alpha_hat - 4‖c‖₁ / denom. Returns alpha_hat when
/// alpha_hat < 1, returns 1 when alpha_tilde <= 1 <= alpha_hat, and returns
/// alpha_tilde otherwise. The result lies in (0, alpha_max · beta].
double adaptive_step(const AdaptiveStep& rule, double tau, double delta_l, double d_norm_sq,
                     double c_l1);

/// Parameters shared by every SQP-type driver in this library.
struct SqpCoreParams {
  double tau_init = 0.1;
  double sigma = 0.5;
  double eps_tau = 1e-6;
  StepRule step = ConstantStep{1.0};
  /// Fixed symmetric curvature matrix for the subproblem; identity when
  /// absent.
  std::optional<Matrix> hessian;
};

struct SvrSqpConfig {
  Vector x_init;
  SqpCoreParams core;
  int batch_size = 16;
  int inner_length = 1;  // iterations per reference point
  double epoch_budget = 30.0;
  SamplingMode sampling = SamplingMode::kWithReplacement;
  /// Store per-component reference gradients so each inner iteration charges
  /// only one batch of evaluations instead of two.
  bool cache_reference_gradients = false;
};

/// Observer payload, emitted after every accepted (non-skipped) step.
struct IterationTrace {
  int outer_k;
  int inner_s;
  Vector x_before;
  Vector x_after;
  Vector gradient_estimate;
  Vector direction;
  Vector multipliers;
  Vector constraint;  // at x_before
  double tau_before;
  double tau_trial;
  double tau_after;
  double curvature;         // dᵀHd
  double model_reduction;   // at tau_after
  double alpha;
};

using IterationObserver = std::function<void(const IterationTrace&)>;

/// Variance-reduced stochastic SQP. Outer iterations refresh a full gradient
/// at the current reference point; each of the inner_length inner iterations
/// draws a batch, forms the variance-reduced gradient estimate, solves the
/// KKT system, updates the merit parameter, and takes the step prescribed by
/// the step rule. Directions with ‖d‖∞ <= 1e-12 (1 + ‖g_bar‖∞ + ‖c‖∞) are
/// skipped: the iterate, merit parameter, and loop position stay unchanged
/// except for the recorded row. One IterateRecord is emitted per inner
/// iteration; the run stops once the epoch budget is reached (checked after
/// the reference gradient and after every inner iteration, so the budget
/// overshoot is at most one epoch). A run whose iterate leaves the
/// representable range stops early and returns the records so far.
/// Errors raised inside an iteration carry its (outer, inner) coordinates.
RunLog run_svr_sqp(const Problem& problem, const SvrSqpConfig& config, Rng rng,
                   const IterationObserver& observer = {});

}  // namespace svrsqp
