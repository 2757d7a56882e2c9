#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svrsqp/metrics.hpp"

namespace svrsqp {

enum class ConstraintKind { kLinear, kL2Ball };

enum class SolverKind {
  kSvrSqpConstant,
  kSvrSqpAdaptive,
  kMinibatchSqpConstant,
  kMinibatchSqpAdaptive,
  kStoSubgradVr,
};

/// How many inner iterations each reference point gets: either a fixed count
/// or floor(N / (divisor * batch_size)) resolved against the dataset.
struct InnerLengthSpec {
  bool from_ratio = true;
  int divisor = 2;   // used when from_ratio
  int absolute = 1;  // used otherwise
};

struct ExperimentConfig {
  std::string dataset_path;
  int dimension_override = 0;

  ConstraintKind constraint = ConstraintKind::kLinear;
  int num_constraints = 10;
  double radius_sq = 1.0;
  std::uint64_t constraint_seed = 0;
  bool resample_constraints_per_seed = false;

  SolverKind solver = SolverKind::kSvrSqpAdaptive;
  double alpha = 1.0;       // constant-step solvers and sto_subgrad_vr
  double beta = 1.0;        // adaptive-step solvers
  double alpha_max = 1e6;   // adaptive-step solvers
  double subgrad_tau = 0.1; // fixed merit parameter for sto_subgrad_vr

  int batch_size = 16;
  InnerLengthSpec inner_length;
  double epochs = 30.0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  double tau_init = 0.1;
  double sigma = 0.5;
  double eps_tau = 1e-6;
  double init_scale = 0.1;
  bool with_replacement = true;
  bool cache_reference_gradients = false;

  std::optional<std::string> out_dir;  // lowest-priority output location
};

/// Parses and validates a JSON config file. Unknown keys, keys that do not
/// apply to the selected solver or constraint, type mismatches, and
/// out-of-range values all raise ConfigError naming the key.
ExperimentConfig load_config(const std::string& path);

std::string solver_name(SolverKind kind);

struct RunOptions {
  std::string out_dir;
  int threads = 0;  // 0 = one per hardware thread, capped at the seed count
  std::optional<std::vector<std::uint64_t>> seeds_override;
};

struct RunResult {
  std::uint64_t seed = 0;
  BestIterate best;
  double wall_seconds = 0.0;
  double lipschitz_estimate = 0.0;
  std::size_t iterations = 0;
};

struct ExperimentOutcome {
  std::string out_dir;
  std::string solver;
  std::vector<RunResult> runs;
  std::optional<AggregateSummary> aggregate;  // present when at least two runs
};

/// Runs the configured solver once per seed (in parallel when allowed) and
/// writes, under out_dir: one trajectory CSV per seed, summary.csv,
/// aggregate.csv (two or more seeds), and metadata.json. All numeric CSV
/// content is deterministic for a fixed config and seed list; wall-clock
/// fields and metadata timestamps are the only nondeterministic outputs.
ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options);

struct ValidationReport {
  int num_samples = 0;
  int num_features = 0;
  int inner_length = 0;  // resolved; 0 for solvers without an inner loop
  long long positive_labels = 0;
  long long negative_labels = 0;
};

/// Loads the dataset and applies every data-dependent config check without
/// running a solver. Throws the same errors run_experiment would.
ValidationReport validate_experiment(const ExperimentConfig& config);

}  // namespace svrsqp
