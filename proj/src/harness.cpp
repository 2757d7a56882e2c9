#include "svrsqp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <thread>

#include "json.hpp"
#include "svrsqp/baselines.hpp"
#include "svrsqp/sqp.hpp"

namespace svrsqp {

namespace {

using nlohmann::json;

constexpr double kLipschitzFloor = 1e-12;

/// Typed, consuming access to a flat JSON object. Keys left unconsumed at the
/// end are reported as unknown.
class ConfigReader {
 public:
  explicit ConfigReader(json obj) : obj_(std::move(obj)) {}

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json* take(const std::string& key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      return nullptr;
    }
    used_.insert(key);
    return &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = take(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_number()) {
      throw ConfigError(key, "expected a number");
    }
    return v->get<double>();
  }

  double number_required(const std::string& key) {
    if (!has(key)) {
      throw ConfigError(key, "required key is missing");
    }
    return number(key, 0.0);
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = take(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_number_integer()) {
      throw ConfigError(key, "expected an integer");
    }
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_boolean()) {
      throw ConfigError(key, "expected a boolean");
    }
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = take(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_string()) {
      throw ConfigError(key, "expected a string");
    }
    return v->get<std::string>();
  }

  std::string text_required(const std::string& key) {
    if (!has(key)) {
      throw ConfigError(key, "required key is missing");
    }
    return text(key, "");
  }

  void forbid(const std::string& key, const std::string& reason) {
    if (has(key)) {
      throw ConfigError(key, reason);
    }
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (used_.find(item.key()) == used_.end()) {
        throw ConfigError(item.key(), "unknown key");
      }
    }
  }

 private:
  json obj_;
  std::set<std::string> used_;
};

SolverKind parse_solver(const std::string& name) {
  if (name == "svr_sqp_c") return SolverKind::kSvrSqpConstant;
  if (name == "svr_sqp_a") return SolverKind::kSvrSqpAdaptive;
  if (name == "minibatch_sqp_c") return SolverKind::kMinibatchSqpConstant;
  if (name == "minibatch_sqp_a") return SolverKind::kMinibatchSqpAdaptive;
  if (name == "sto_subgrad_vr") return SolverKind::kStoSubgradVr;
  throw ConfigError("solver",
                    "unknown solver '" + name +
                        "' (expected svr_sqp_c, svr_sqp_a, minibatch_sqp_c, minibatch_sqp_a, or "
                        "sto_subgrad_vr)");
}

bool uses_constant_step(SolverKind kind) {
  return kind == SolverKind::kSvrSqpConstant || kind == SolverKind::kMinibatchSqpConstant;
}

bool uses_adaptive_step(SolverKind kind) {
  return kind == SolverKind::kSvrSqpAdaptive || kind == SolverKind::kMinibatchSqpAdaptive;
}

bool is_minibatch(SolverKind kind) {
  return kind == SolverKind::kMinibatchSqpConstant || kind == SolverKind::kMinibatchSqpAdaptive;
}

InnerLengthSpec parse_inner_length(ConfigReader& reader) {
  InnerLengthSpec spec;
  const json* v = reader.take("inner_length");
  if (v == nullptr) {
    return spec;  // N / (2 b)
  }
  if (v->is_number_integer()) {
    spec.from_ratio = false;
    spec.absolute = v->get<int>();
    if (spec.absolute < 1) {
      throw ConfigError("inner_length", "must be at least 1");
    }
    return spec;
  }
  if (v->is_string()) {
    std::string text = v->get<std::string>();
    spec.from_ratio = true;
    if (text == "N/b") {
      spec.divisor = 1;
    } else if (text == "N/2b") {
      spec.divisor = 2;
    } else if (text == "N/4b") {
      spec.divisor = 4;
    } else {
      throw ConfigError("inner_length", "expected an integer or one of \"N/b\", \"N/2b\", \"N/4b\"");
    }
    return spec;
  }
  throw ConfigError("inner_length", "expected an integer or one of \"N/b\", \"N/2b\", \"N/4b\"");
}

std::vector<std::uint64_t> parse_seeds(ConfigReader& reader) {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const json* v = reader.take("seeds");
  if (v == nullptr) {
    return seeds;
  }
  if (!v->is_array() || v->empty()) {
    throw ConfigError("seeds", "expected a non-empty array of non-negative integers");
  }
  seeds.clear();
  for (const json& entry : *v) {
    if (!entry.is_number_integer() || entry.get<long long>() < 0) {
      throw ConfigError("seeds", "expected a non-empty array of non-negative integers");
    }
    seeds.push_back(entry.get<std::uint64_t>());
  }
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw ConfigError("seeds", "seeds must be distinct");
  }
  return seeds;
}

std::string format_double(double v) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buf;
}

ConstraintSpec build_constraints(const ExperimentConfig& config, int dimension, Rng rng) {
  if (config.constraint == ConstraintKind::kL2Ball) {
    return L2BallConstraint{config.radius_sq};
  }
  return make_linear_constraints(dimension, config.num_constraints, rng.split(kStreamConstraint));
}

Vector draw_start_point(int dimension, double scale, Rng rng) {
  Rng stream = rng.split(kStreamInit);
  Vector z(dimension);
  double norm = 0.0;
  do {
    for (int i = 0; i < dimension; ++i) {
      z[i] = stream.next_gaussian();
    }
    norm = z.norm();
  } while (norm == 0.0);
  return (scale / norm) * z;
}

RunLog dispatch_solver(const Problem& problem, const ExperimentConfig& config, int inner_length,
                       const Vector& x0, double lipschitz, Rng run_rng) {
  SamplingMode mode = config.with_replacement ? SamplingMode::kWithReplacement
                                              : SamplingMode::kWithoutReplacement;
  double gamma = problem.constraint_gradient_lipschitz();

  if (config.solver == SolverKind::kStoSubgradVr) {
    StoSubgradVrConfig sub;
    sub.x_init = x0;
    sub.tau = config.subgrad_tau;
    sub.alpha = config.alpha;
    sub.lipschitz = lipschitz;
    sub.gamma = gamma;
    sub.batch_size = config.batch_size;
    sub.inner_length = inner_length;
    sub.epoch_budget = config.epochs;
    sub.sampling = mode;
    sub.cache_reference_gradients = config.cache_reference_gradients;
    return run_sto_subgrad_vr(problem, sub, run_rng);
  }

  SqpCoreParams core;
  core.tau_init = config.tau_init;
  core.sigma = config.sigma;
  core.eps_tau = config.eps_tau;
  if (uses_constant_step(config.solver)) {
    core.step = ConstantStep{config.alpha};
  } else {
    core.step = AdaptiveStep{config.beta, config.alpha_max, lipschitz, gamma};
  }

  if (is_minibatch(config.solver)) {
    MinibatchSqpConfig cfg;
    cfg.x_init = x0;
    cfg.core = core;
    cfg.batch_size = config.batch_size;
    cfg.epoch_budget = config.epochs;
    cfg.sampling = mode;
    return run_minibatch_sqp(problem, cfg, run_rng);
  }

  SvrSqpConfig cfg;
  cfg.x_init = x0;
  cfg.core = core;
  cfg.batch_size = config.batch_size;
  cfg.inner_length = inner_length;
  cfg.epoch_budget = config.epochs;
  cfg.sampling = mode;
  cfg.cache_reference_gradients = config.cache_reference_gradients;
  return run_svr_sqp(problem, cfg, run_rng);
}

std::string render_trajectory(const RunLog& log) {
  std::string out = "epoch,outer_k,inner_s,feasibility_inf,stationarity_inf,merit,tau,step\n";
  for (const IterateRecord& row : log) {
    out += format_double(row.epoch);
    out += ',';
    out += std::to_string(row.outer_k);
    out += ',';
    out += std::to_string(row.inner_s);
    out += ',';
    out += format_double(row.feasibility_inf);
    out += ',';
    out += format_double(row.stationarity_inf);
    out += ',';
    out += format_double(row.merit);
    out += ',';
    out += format_double(row.tau);
    out += ',';
    out += format_double(row.step);
    out += '\n';
  }
  return out;
}

bool solver_needs_lipschitz(SolverKind kind) {
  return uses_adaptive_step(kind) || kind == SolverKind::kStoSubgradVr;
}

Dataset load_dataset_checked(const ExperimentConfig& config) {
  if (!std::filesystem::exists(config.dataset_path)) {
    throw ConfigError("dataset", "file not found: " + config.dataset_path);
  }
  return load_libsvm_file(config.dataset_path, config.dimension_override);
}

// Data-dependent config checks; returns the resolved inner length.
int check_against_dataset(const ExperimentConfig& config, const Dataset& dataset) {
  const int count = dataset.num_samples();
  const int n = dataset.num_features();
  if (config.batch_size > count - 1) {
    throw ConfigError("batch_size", "must be at most N-1 = " + std::to_string(count - 1));
  }
  if (config.constraint == ConstraintKind::kLinear && config.num_constraints >= n) {
    throw ConfigError("num_constraints",
                      "must be smaller than the feature dimension " + std::to_string(n));
  }
  if (is_minibatch(config.solver)) {
    return 0;
  }
  if (config.inner_length.from_ratio) {
    return std::max(1, count / (config.inner_length.divisor * config.batch_size));
  }
  return config.inner_length.absolute;
}

}  // namespace

std::string solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kSvrSqpConstant:
      return "svr_sqp_c";
    case SolverKind::kSvrSqpAdaptive:
      return "svr_sqp_a";
    case SolverKind::kMinibatchSqpConstant:
      return "minibatch_sqp_c";
    case SolverKind::kMinibatchSqpAdaptive:
      return "minibatch_sqp_a";
    case SolverKind::kStoSubgradVr:
      return "sto_subgrad_vr";
  }
  return "unknown";
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open file: " + path);
  }
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) {
    throw ConfigError("config", "top-level value must be an object");
  }

  ConfigReader reader(std::move(obj));
  ExperimentConfig config;

  config.dataset_path = reader.text_required("dataset");
  if (config.dataset_path.empty()) {
    throw ConfigError("dataset", "must be a non-empty path");
  }
  config.dimension_override = static_cast<int>(reader.integer("dimension_override", 0));
  if (config.dimension_override < 0) {
    throw ConfigError("dimension_override", "must be non-negative");
  }

  std::string constraint = reader.text_required("constraint");
  if (constraint == "linear") {
    config.constraint = ConstraintKind::kLinear;
    reader.forbid("radius_sq", "only applies to the l2_ball constraint");
    config.num_constraints = static_cast<int>(reader.integer("num_constraints", 10));
    if (config.num_constraints < 1) {
      throw ConfigError("num_constraints", "must be at least 1");
    }
  } else if (constraint == "l2_ball") {
    config.constraint = ConstraintKind::kL2Ball;
    reader.forbid("num_constraints", "only applies to the linear constraint");
    reader.forbid("resample_constraints_per_seed", "only applies to the linear constraint");
    config.radius_sq = reader.number("radius_sq", 1.0);
    if (!(config.radius_sq > 0.0)) {
      throw ConfigError("radius_sq", "must be positive");
    }
  } else {
    throw ConfigError("constraint", "expected \"linear\" or \"l2_ball\"");
  }
  config.constraint_seed = static_cast<std::uint64_t>(reader.integer("constraint_seed", 0));
  config.resample_constraints_per_seed = reader.boolean("resample_constraints_per_seed", false);

  config.solver = parse_solver(reader.text_required("solver"));
  if (uses_constant_step(config.solver) || config.solver == SolverKind::kStoSubgradVr) {
    reader.forbid("beta", "only applies to adaptive-step solvers");
    reader.forbid("alpha_max", "only applies to adaptive-step solvers");
    config.alpha = reader.number_required("alpha");
    if (!(config.alpha > 0.0)) {
      throw ConfigError("alpha", "must be positive");
    }
  } else {
    reader.forbid("alpha", "only applies to constant-step solvers and sto_subgrad_vr");
    config.beta = reader.number("beta", 1.0);
    if (!(config.beta > 0.0 && config.beta <= 1.0)) {
      throw ConfigError("beta", "must lie in (0, 1]");
    }
    config.alpha_max = reader.number("alpha_max", 1e6);
    if (!(config.alpha_max > 0.0)) {
      throw ConfigError("alpha_max", "must be positive");
    }
  }
  if (config.solver == SolverKind::kStoSubgradVr) {
    config.subgrad_tau = reader.number("subgrad_tau", 0.1);
    if (!(config.subgrad_tau > 0.0)) {
      throw ConfigError("subgrad_tau", "must be positive");
    }
  } else {
    reader.forbid("subgrad_tau", "only applies to sto_subgrad_vr");
  }

  config.batch_size = static_cast<int>(reader.integer("batch_size", 16));
  if (config.batch_size < 1) {
    throw ConfigError("batch_size", "must be at least 1");
  }
  if (is_minibatch(config.solver)) {
    reader.forbid("inner_length", "not used by minibatch solvers");
    reader.forbid("cache_reference_gradients", "not used by minibatch solvers");
  } else {
    config.inner_length = parse_inner_length(reader);
    config.cache_reference_gradients = reader.boolean("cache_reference_gradients", false);
  }
  config.epochs = reader.number("epochs", 30.0);
  if (!(config.epochs > 0.0)) {
    throw ConfigError("epochs", "must be positive");
  }
  config.seeds = parse_seeds(reader);

  config.tau_init = reader.number("tau_init", 0.1);
  if (!(config.tau_init > 0.0)) {
    throw ConfigError("tau_init", "must be positive");
  }
  config.sigma = reader.number("sigma", 0.5);
  if (!(config.sigma > 0.0 && config.sigma < 1.0)) {
    throw ConfigError("sigma", "must lie in (0, 1)");
  }
  config.eps_tau = reader.number("eps_tau", 1e-6);
  if (!(config.eps_tau > 0.0 && config.eps_tau < 1.0)) {
    throw ConfigError("eps_tau", "must lie in (0, 1)");
  }
  config.init_scale = reader.number("init_scale", 0.1);
  if (!(config.init_scale > 0.0)) {
    throw ConfigError("init_scale", "must be positive");
  }

  std::string sampling = reader.text("sampling", "with_replacement");
  if (sampling == "with_replacement") {
    config.with_replacement = true;
  } else if (sampling == "without_replacement") {
    config.with_replacement = false;
  } else {
    throw ConfigError("sampling", "expected \"with_replacement\" or \"without_replacement\"");
  }

  if (reader.has("out_dir")) {
    config.out_dir = reader.text("out_dir", "");
    if (config.out_dir->empty()) {
      throw ConfigError("out_dir", "must be a non-empty path");
    }
  }

  reader.finish();
  return config;
}

ValidationReport validate_experiment(const ExperimentConfig& config) {
  Dataset dataset = load_dataset_checked(config);
  ValidationReport report;
  report.inner_length = check_against_dataset(config, dataset);
  report.num_samples = dataset.num_samples();
  report.num_features = dataset.num_features();
  report.positive_labels = (dataset.labels.array() > 0).count();
  report.negative_labels = (dataset.labels.array() < 0).count();
  return report;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  Dataset dataset = load_dataset_checked(config);
  const int n = dataset.num_features();
  const int count = dataset.num_samples();
  const int inner_length = check_against_dataset(config, dataset);

  std::vector<std::uint64_t> seeds = options.seeds_override.value_or(config.seeds);
  if (seeds.empty()) {
    throw ConfigError("seeds", "expected at least one seed");
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds", "seeds must be distinct");
  }

  std::shared_ptr<const LogisticProblem> shared_problem;
  if (!config.resample_constraints_per_seed) {
    ConstraintSpec spec = build_constraints(config, n, Rng(config.constraint_seed));
    shared_problem = std::make_shared<LogisticProblem>(dataset, std::move(spec));
  }

  std::vector<RunResult> results(seeds.size());
  std::vector<std::string> trajectories(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());

  auto worker_body = [&](std::size_t slot) {
    std::uint64_t seed = seeds[slot];
    Rng run_rng(seed);

    std::shared_ptr<const LogisticProblem> local_problem = shared_problem;
    if (local_problem == nullptr) {
      ConstraintSpec spec = build_constraints(config, n, run_rng);
      local_problem = std::make_shared<LogisticProblem>(dataset, std::move(spec));
    }
    const Problem& problem = *local_problem;

    Vector x0 = draw_start_point(n, config.init_scale, run_rng);
    double lipschitz = 0.0;
    if (solver_needs_lipschitz(config.solver)) {
      lipschitz =
          std::max(estimate_lipschitz(problem, x0, run_rng.split(kStreamLipschitz)), kLipschitzFloor);
    }

    auto start = std::chrono::steady_clock::now();
    RunLog log = dispatch_solver(problem, config, inner_length, x0, lipschitz, run_rng);
    std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    RunResult result;
    result.seed = seed;
    result.wall_seconds = elapsed.count();
    result.lipschitz_estimate = lipschitz;
    result.iterations = log.size();
    if (log.empty()) {
      result.best = BestIterate{0, std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::infinity()};
    } else {
      result.best = select_best(log);
    }
    results[slot] = result;
    trajectories[slot] = render_trajectory(log);
  };

  unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  int thread_count = options.threads > 0 ? options.threads : static_cast<int>(hardware);
  thread_count = std::min<int>(thread_count, static_cast<int>(seeds.size()));

  if (thread_count <= 1) {
    for (std::size_t slot = 0; slot < seeds.size(); ++slot) {
      worker_body(slot);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto pump = [&] {
      for (std::size_t slot = next.fetch_add(1); slot < seeds.size(); slot = next.fetch_add(1)) {
        try {
          worker_body(slot);
        } catch (...) {
          failures[slot] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back(pump);
    }
    for (std::thread& t : pool) {
      t.join();
    }
    for (const std::exception_ptr& failure : failures) {
      if (failure) {
        std::rethrow_exception(failure);
      }
    }
  }

  const std::string solver = solver_name(config.solver);
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);

  for (std::size_t slot = 0; slot < seeds.size(); ++slot) {
    fs::path path =
        fs::path(options.out_dir) / ("trajectory_" + solver + "_" + std::to_string(seeds[slot]) +
                                     ".csv");
    std::ofstream out(path);
    if (!out) {
      throw Error("cannot write " + path.string());
    }
    out << trajectories[slot];
  }

  {
    std::ofstream out(fs::path(options.out_dir) / "summary.csv");
    out << "solver,seed,best_feasibility,best_stationarity,wall_seconds\n";
    for (const RunResult& run : results) {
      out << solver << ',' << run.seed << ',' << format_double(run.best.feasibility_inf) << ','
          << format_double(run.best.stationarity_inf) << ',' << format_double(run.wall_seconds)
          << '\n';
    }
  }

  ExperimentOutcome outcome;
  outcome.out_dir = options.out_dir;
  outcome.solver = solver;
  outcome.runs = results;

  if (results.size() >= 2) {
    std::vector<BestIterate> bests;
    bests.reserve(results.size());
    for (const RunResult& run : results) {
      bests.push_back(run.best);
    }
    outcome.aggregate = aggregate(bests);

    std::ofstream out(fs::path(options.out_dir) / "aggregate.csv");
    out << "solver,runs,mean_best_feasibility,halfwidth_best_feasibility,"
           "mean_best_stationarity,halfwidth_best_stationarity\n";
    out << solver << ',' << results.size() << ',' << format_double(outcome.aggregate->feasibility.mean)
        << ',' << format_double(outcome.aggregate->feasibility.halfwidth95) << ','
        << format_double(outcome.aggregate->stationarity.mean) << ','
        << format_double(outcome.aggregate->stationarity.halfwidth95) << '\n';
  }

  {
    json meta;
    meta["created_at"] = utc_timestamp();
    meta["dataset"] = {
        {"path", config.dataset_path},
        {"num_samples", count},
        {"num_features", n},
        {"positive_labels", static_cast<long long>((dataset.labels.array() > 0).count())},
        {"negative_labels", static_cast<long long>((dataset.labels.array() < 0).count())},
    };
    meta["solver"] = solver;
    meta["batch_size"] = config.batch_size;
    if (!is_minibatch(config.solver)) {
      meta["inner_length"] = inner_length;
      meta["cache_reference_gradients"] = config.cache_reference_gradients;
    }
    meta["epochs"] = config.epochs;
    meta["sampling"] = config.with_replacement ? "with_replacement" : "without_replacement";
    if (config.constraint == ConstraintKind::kLinear) {
      meta["constraint"] = {{"kind", "linear"},
                            {"num_constraints", config.num_constraints},
                            {"seed", config.constraint_seed},
                            {"resample_per_seed", config.resample_constraints_per_seed}};
    } else {
      meta["constraint"] = {{"kind", "l2_ball"}, {"radius_sq", config.radius_sq}};
    }
    if (uses_constant_step(config.solver) || config.solver == SolverKind::kStoSubgradVr) {
      meta["alpha"] = config.alpha;
    } else {
      meta["beta"] = config.beta;
      meta["alpha_max"] = config.alpha_max;
    }
    if (config.solver == SolverKind::kStoSubgradVr) {
      meta["subgrad_tau"] = config.subgrad_tau;
    } else {
      meta["merit"] = {
          {"tau_init", config.tau_init}, {"sigma", config.sigma}, {"eps_tau", config.eps_tau}};
    }
    meta["init_scale"] = config.init_scale;
    meta["seeds"] = seeds;
    json runs = json::array();
    for (const RunResult& run : results) {
      json item = {{"seed", run.seed},
                   {"iterations", run.iterations},
                   {"wall_seconds", run.wall_seconds},
                   {"best_feasibility", run.best.feasibility_inf},
                   {"best_stationarity", run.best.stationarity_inf}};
      if (solver_needs_lipschitz(config.solver)) {
        item["lipschitz_estimate"] = run.lipschitz_estimate;
      }
      runs.push_back(item);
    }
    meta["runs"] = runs;

    std::ofstream out(fs::path(options.out_dir) / "metadata.json");
    out << meta.dump(2) << '\n';
  }

  return outcome;
}

}  // namespace svrsqp
