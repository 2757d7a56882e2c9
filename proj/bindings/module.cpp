#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <optional>
#include <utility>

#include "svrsqp/baselines.hpp"
#include "svrsqp/errors.hpp"
#include "svrsqp/gradients.hpp"
#include "svrsqp/harness.hpp"
#include "svrsqp/linalg.hpp"
#include "svrsqp/metrics.hpp"
#include "svrsqp/problems.hpp"
#include "svrsqp/rng.hpp"
#include "svrsqp/sqp.hpp"

namespace py = pybind11;
using namespace svrsqp;

namespace {

StepRule build_step(std::optional<double> alpha, double beta, double alpha_max, double lipschitz,
                    double gamma) {
  if (alpha.has_value()) {
    return ConstantStep{*alpha};
  }
  return AdaptiveStep{beta, alpha_max, lipschitz, gamma};
}

SamplingMode sampling_mode(bool with_replacement) {
  return with_replacement ? SamplingMode::kWithReplacement : SamplingMode::kWithoutReplacement;
}

std::string record_repr(const IterateRecord& r) {
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer),
                "IterateRecord(epoch=%g, outer_k=%d, inner_s=%d, feasibility=%.3e, "
                "stationarity=%.3e, merit=%.6g, tau=%g, step=%g)",
                r.epoch, r.outer_k, r.inner_s, r.feasibility_inf, r.stationarity_inf, r.merit,
                r.tau, r.step);
  return buffer;
}

}  // namespace

PYBIND11_MODULE(_svrsqp, m) {
  m.doc() = "Variance-reduced stochastic SQP for equality-constrained finite-sum minimization";
  m.attr("__version__") = "0.1.0";

  // Base registered first so the derived translators, which run before it,
  // take precedence.
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<RankDeficientJacobian>(m, "RankDeficientJacobian", error);
  py::register_exception<SingularKkt>(m, "SingularKkt", error);
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", error);
  py::register_exception<DegenerateDirection>(m, "DegenerateDirection", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<LabelError>(m, "LabelError", error);
  py::register_exception<ConfigError>(m, "ConfigError", error);
  py::register_exception<InsufficientRuns>(m, "InsufficientRuns", error);

  py::class_<KktSolution>(m, "KktSolution")
      .def_readonly("d", &KktSolution::d)
      .def_readonly("y", &KktSolution::y);

  m.def("solve_kkt", &solve_kkt, py::arg("h"), py::arg("j"), py::arg("g"), py::arg("c"),
        "Solve the equality-constrained quadratic subproblem's saddle-point system.");
  m.def("least_squares_multipliers", &least_squares_multipliers, py::arg("j"), py::arg("g"),
        "Multipliers minimizing the norm of g + J^T y.");

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("num_samples", &Dataset::num_samples)
      .def_property_readonly("num_features", &Dataset::num_features)
      .def_readonly("labels", &Dataset::labels)
      .def("dense_features", [](const Dataset& d) { return Matrix(d.features); },
           "The feature matrix as a dense array.");

  m.def("load_dataset", &load_libsvm_file, py::arg("path"), py::arg("dimension_override") = 0,
        "Read a sparse `label index:value ...` file with 1-based indices.");

  py::class_<LinearConstraints>(m, "LinearConstraints")
      .def(py::init([](Matrix a, Vector rhs) {
             return LinearConstraints{std::move(a), std::move(rhs)};
           }),
           py::arg("a"), py::arg("rhs"))
      .def_readwrite("a", &LinearConstraints::a)
      .def_readwrite("rhs", &LinearConstraints::rhs);

  py::class_<L2BallConstraint>(m, "L2BallConstraint")
      .def(py::init([](double radius_sq) { return L2BallConstraint{radius_sq}; }),
           py::arg("radius_sq") = 1.0)
      .def_readwrite("radius_sq", &L2BallConstraint::radius_sq);

  m.def(
      "make_linear_constraints",
      [](int dimension, int num_constraints, std::uint64_t seed) {
        return make_linear_constraints(dimension, num_constraints,
                                       Rng(seed).split(kStreamConstraint));
      },
      py::arg("dimension"), py::arg("num_constraints"), py::arg("seed"),
      "Random affine constraints from the same stream the experiment harness derives "
      "from a constraint seed.");

  py::class_<Problem>(m, "Problem")
      .def("dimension", &Problem::dimension)
      .def("num_components", &Problem::num_components)
      .def("num_constraints", &Problem::num_constraints)
      .def("objective", &Problem::objective, py::arg("x"))
      .def("component_gradient", &Problem::component_gradient, py::arg("i"), py::arg("x"))
      .def("full_gradient", &Problem::full_gradient, py::arg("x"))
      .def("constraint", &Problem::constraint, py::arg("x"))
      .def("jacobian", &Problem::jacobian, py::arg("x"))
      .def("constraint_gradient_lipschitz", &Problem::constraint_gradient_lipschitz);

  py::class_<LogisticProblem, Problem>(m, "LogisticProblem")
      .def(py::init<Dataset, ConstraintSpec>(), py::arg("dataset"), py::arg("constraints"),
           "Mean logistic loss over the dataset under the given equality constraints.");

  m.def(
      "estimate_lipschitz",
      [](const Problem& problem, const Vector& x, std::uint64_t seed) {
        return estimate_lipschitz(problem, x, Rng(seed).split(kStreamLipschitz));
      },
      py::arg("problem"), py::arg("x"), py::arg("seed"),
      "Probe the gradient Lipschitz constant around x.");

  m.def(
      "minibatch_gradient",
      [](const Problem& problem, const Vector& x, const std::vector<int>& batch) {
        EvalCounter counter(problem.num_components());
        return minibatch_gradient(problem, x, batch, counter);
      },
      py::arg("problem"), py::arg("x"), py::arg("batch"));

  m.def(
      "svrg_gradient",
      [](const Problem& problem, const Vector& x, const Vector& x_ref,
         const Vector& reference_gradient, const std::vector<int>& batch) {
        EvalCounter counter(problem.num_components());
        return svrg_gradient(problem, x, x_ref, reference_gradient, batch, counter);
      },
      py::arg("problem"), py::arg("x"), py::arg("x_ref"), py::arg("reference_gradient"),
      py::arg("batch"),
      "Variance-reduced estimate: batch mean of gradient differences plus the reference "
      "gradient.");

  py::class_<IterateRecord>(m, "IterateRecord")
      .def_readonly("epoch", &IterateRecord::epoch)
      .def_readonly("outer_k", &IterateRecord::outer_k)
      .def_readonly("inner_s", &IterateRecord::inner_s)
      .def_readonly("feasibility_inf", &IterateRecord::feasibility_inf)
      .def_readonly("stationarity_inf", &IterateRecord::stationarity_inf)
      .def_readonly("merit", &IterateRecord::merit)
      .def_readonly("tau", &IterateRecord::tau)
      .def_readonly("step", &IterateRecord::step)
      .def("__repr__", &record_repr);

  m.def("merit_value", &merit_value, py::arg("problem"), py::arg("x"), py::arg("tau"));
  m.def("stationarity_error", &stationarity_error, py::arg("problem"), py::arg("x"),
        "Infinity norm of the gradient of the Lagrangian with least-squares multipliers.");

  py::class_<BestIterate>(m, "BestIterate")
      .def_readonly("index", &BestIterate::index)
      .def_readonly("feasibility_inf", &BestIterate::feasibility_inf)
      .def_readonly("stationarity_inf", &BestIterate::stationarity_inf)
      .def("__repr__", [](const BestIterate& b) {
        char buffer[120];
        std::snprintf(buffer, sizeof(buffer),
                      "BestIterate(index=%zu, feasibility=%.3e, stationarity=%.3e)", b.index,
                      b.feasibility_inf, b.stationarity_inf);
        return std::string(buffer);
      });

  m.def("select_best", &select_best, py::arg("log"),
        "Best-iterate rule: most stationary record among those feasible to 1e-6, or the "
        "most feasible record when none qualifies.");

  py::class_<MeanHalfwidth>(m, "MeanHalfwidth")
      .def_readonly("mean", &MeanHalfwidth::mean)
      .def_readonly("halfwidth95", &MeanHalfwidth::halfwidth95);

  py::class_<AggregateSummary>(m, "AggregateSummary")
      .def_readonly("feasibility", &AggregateSummary::feasibility)
      .def_readonly("stationarity", &AggregateSummary::stationarity)
      .def_readonly("runs", &AggregateSummary::runs);

  m.def("aggregate", &aggregate, py::arg("runs"),
        "Mean and 95% halfwidth of best-iterate metrics over at least two runs.");

  m.def(
      "run_svr_sqp",
      [](const Problem& problem, const Vector& x_init, std::uint64_t seed, int batch_size,
         int inner_length, double epochs, std::optional<double> alpha, double beta,
         double alpha_max, double lipschitz, double gamma, double tau_init, double sigma,
         double eps_tau, bool with_replacement, bool cache_reference_gradients) {
        SvrSqpConfig config;
        config.x_init = x_init;
        config.core.tau_init = tau_init;
        config.core.sigma = sigma;
        config.core.eps_tau = eps_tau;
        config.core.step = build_step(alpha, beta, alpha_max, lipschitz, gamma);
        config.batch_size = batch_size;
        config.inner_length = inner_length;
        config.epoch_budget = epochs;
        config.sampling = sampling_mode(with_replacement);
        config.cache_reference_gradients = cache_reference_gradients;
        return run_svr_sqp(problem, config, Rng(seed));
      },
      py::arg("problem"), py::arg("x_init"), py::arg("seed"), py::kw_only(),
      py::arg("batch_size") = 16, py::arg("inner_length") = 1, py::arg("epochs") = 30.0,
      py::arg("alpha") = py::none(), py::arg("beta") = 1.0, py::arg("alpha_max") = 1e6,
      py::arg("lipschitz") = 1.0, py::arg("gamma") = 0.0, py::arg("tau_init") = 0.1,
      py::arg("sigma") = 0.5, py::arg("eps_tau") = 1e-6, py::arg("with_replacement") = true,
      py::arg("cache_reference_gradients") = false,
      "Variance-reduced stochastic SQP. Passing alpha selects the constant step rule; "
      "otherwise the adaptive rule uses beta, alpha_max, lipschitz, and gamma.");

  m.def(
      "run_minibatch_sqp",
      [](const Problem& problem, const Vector& x_init, std::uint64_t seed, int batch_size,
         double epochs, std::optional<double> alpha, double beta, double alpha_max,
         double lipschitz, double gamma, double tau_init, double sigma, double eps_tau,
         bool with_replacement) {
        MinibatchSqpConfig config;
        config.x_init = x_init;
        config.core.tau_init = tau_init;
        config.core.sigma = sigma;
        config.core.eps_tau = eps_tau;
        config.core.step = build_step(alpha, beta, alpha_max, lipschitz, gamma);
        config.batch_size = batch_size;
        config.epoch_budget = epochs;
        config.sampling = sampling_mode(with_replacement);
        return run_minibatch_sqp(problem, config, Rng(seed));
      },
      py::arg("problem"), py::arg("x_init"), py::arg("seed"), py::kw_only(),
      py::arg("batch_size") = 16, py::arg("epochs") = 30.0, py::arg("alpha") = py::none(),
      py::arg("beta") = 1.0, py::arg("alpha_max") = 1e6, py::arg("lipschitz") = 1.0,
      py::arg("gamma") = 0.0, py::arg("tau_init") = 0.1, py::arg("sigma") = 0.5,
      py::arg("eps_tau") = 1e-6, py::arg("with_replacement") = true,
      "Stochastic SQP without variance reduction (plain batch-mean gradient estimate).");

  m.def(
      "run_sto_subgrad_vr",
      [](const Problem& problem, const Vector& x_init, std::uint64_t seed, double tau,
         double alpha, double lipschitz, double gamma, int batch_size, int inner_length,
         double epochs, bool with_replacement, bool cache_reference_gradients) {
        StoSubgradVrConfig config;
        config.x_init = x_init;
        config.tau = tau;
        config.alpha = alpha;
        config.lipschitz = lipschitz;
        config.gamma = gamma;
        config.batch_size = batch_size;
        config.inner_length = inner_length;
        config.epoch_budget = epochs;
        config.sampling = sampling_mode(with_replacement);
        config.cache_reference_gradients = cache_reference_gradients;
        return run_sto_subgrad_vr(problem, config, Rng(seed));
      },
      py::arg("problem"), py::arg("x_init"), py::arg("seed"), py::kw_only(),
      py::arg("tau") = 0.1, py::arg("alpha") = 1.0, py::arg("lipschitz") = 1.0,
      py::arg("gamma") = 0.0, py::arg("batch_size") = 16, py::arg("inner_length") = 1,
      py::arg("epochs") = 30.0, py::arg("with_replacement") = true,
      py::arg("cache_reference_gradients") = false,
      "Variance-reduced subgradient descent on the merit function (no KKT solves).");

  py::enum_<ConstraintKind>(m, "ConstraintKind")
      .value("LINEAR", ConstraintKind::kLinear)
      .value("L2_BALL", ConstraintKind::kL2Ball);

  py::enum_<SolverKind>(m, "SolverKind")
      .value("SVR_SQP_CONSTANT", SolverKind::kSvrSqpConstant)
      .value("SVR_SQP_ADAPTIVE", SolverKind::kSvrSqpAdaptive)
      .value("MINIBATCH_SQP_CONSTANT", SolverKind::kMinibatchSqpConstant)
      .value("MINIBATCH_SQP_ADAPTIVE", SolverKind::kMinibatchSqpAdaptive)
      .value("STO_SUBGRAD_VR", SolverKind::kStoSubgradVr);

  m.def("solver_name", &solver_name, py::arg("kind"));

  py::class_<InnerLengthSpec>(m, "InnerLengthSpec")
      .def(py::init<>())
      .def_readwrite("from_ratio", &InnerLengthSpec::from_ratio)
      .def_readwrite("divisor", &InnerLengthSpec::divisor)
      .def_readwrite("absolute", &InnerLengthSpec::absolute);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("dataset_path", &ExperimentConfig::dataset_path)
      .def_readwrite("dimension_override", &ExperimentConfig::dimension_override)
      .def_readwrite("constraint", &ExperimentConfig::constraint)
      .def_readwrite("num_constraints", &ExperimentConfig::num_constraints)
      .def_readwrite("radius_sq", &ExperimentConfig::radius_sq)
      .def_readwrite("constraint_seed", &ExperimentConfig::constraint_seed)
      .def_readwrite("resample_constraints_per_seed",
                     &ExperimentConfig::resample_constraints_per_seed)
      .def_readwrite("solver", &ExperimentConfig::solver)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("beta", &ExperimentConfig::beta)
      .def_readwrite("alpha_max", &ExperimentConfig::alpha_max)
      .def_readwrite("subgrad_tau", &ExperimentConfig::subgrad_tau)
      .def_readwrite("batch_size", &ExperimentConfig::batch_size)
      .def_readwrite("inner_length", &ExperimentConfig::inner_length)
      .def_readwrite("epochs", &ExperimentConfig::epochs)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("tau_init", &ExperimentConfig::tau_init)
      .def_readwrite("sigma", &ExperimentConfig::sigma)
      .def_readwrite("eps_tau", &ExperimentConfig::eps_tau)
      .def_readwrite("init_scale", &ExperimentConfig::init_scale)
      .def_readwrite("with_replacement", &ExperimentConfig::with_replacement)
      .def_readwrite("cache_reference_gradients", &ExperimentConfig::cache_reference_gradients)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir);

  m.def("load_config", &load_config, py::arg("path"),
        "Parse and validate a JSON experiment config.");

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("seed", &RunResult::seed)
      .def_readonly("best", &RunResult::best)
      .def_readonly("wall_seconds", &RunResult::wall_seconds)
      .def_readonly("lipschitz_estimate", &RunResult::lipschitz_estimate)
      .def_readonly("iterations", &RunResult::iterations);

  py::class_<ExperimentOutcome>(m, "ExperimentOutcome")
      .def_readonly("out_dir", &ExperimentOutcome::out_dir)
      .def_readonly("solver", &ExperimentOutcome::solver)
      .def_readonly("runs", &ExperimentOutcome::runs)
      .def_readonly("aggregate", &ExperimentOutcome::aggregate);

  py::class_<ValidationReport>(m, "ValidationReport")
      .def_readonly("num_samples", &ValidationReport::num_samples)
      .def_readonly("num_features", &ValidationReport::num_features)
      .def_readonly("inner_length", &ValidationReport::inner_length)
      .def_readonly("positive_labels", &ValidationReport::positive_labels)
      .def_readonly("negative_labels", &ValidationReport::negative_labels);

  m.def(
      "run_experiment",
      [](const ExperimentConfig& config, const std::string& out_dir, int threads,
         std::optional<std::vector<std::uint64_t>> seeds) {
        RunOptions options;
        options.out_dir = out_dir;
        options.threads = threads;
        options.seeds_override = std::move(seeds);
        return run_experiment(config, options);
      },
      py::arg("config"), py::arg("out_dir"), py::arg("threads") = 0,
      py::arg("seeds") = py::none(),
      "Run the configured solver over its seeds and write trajectory, summary, aggregate, "
      "and metadata files under out_dir.");

  m.def("validate_experiment", &validate_experiment, py::arg("config"),
        "Apply every data-dependent config check without running a solver.");
}
