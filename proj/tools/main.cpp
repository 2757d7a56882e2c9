#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svrsqp/harness.hpp"
#include "svrsqp/problems.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string token = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (token.empty()) {
      throw svrsqp::ConfigError("seeds", "empty entry in seed list '" + text + "'");
    }
    try {
      std::size_t consumed = 0;
      unsigned long long value = std::stoull(token, &consumed);
      if (consumed != token.size()) {
        throw std::invalid_argument(token);
      }
      seeds.push_back(value);
    } catch (const std::exception&) {
      throw svrsqp::ConfigError("seeds", "invalid seed '" + token + "'");
    }
    if (comma == std::string::npos) {
      break;
    }
    pos = comma + 1;
  }
  return seeds;
}

std::string resolve_out_dir(const std::string& flag, const svrsqp::ExperimentConfig& config) {
  if (!flag.empty()) {
    return flag;
  }
  const char* env = std::getenv("SVRSQP_OUT_DIR");
  if (env != nullptr && *env != '\0') {
    return env;
  }
  if (config.out_dir) {
    return *config.out_dir;
  }
  return "svrsqp_out";
}

int do_run(const std::string& config_path, const std::string& out_dir_flag,
           const std::string& seeds_flag, int threads) {
  svrsqp::ExperimentConfig config = svrsqp::load_config(config_path);

  svrsqp::RunOptions options;
  options.threads = threads;
  options.out_dir = resolve_out_dir(out_dir_flag, config);
  if (!seeds_flag.empty()) {
    options.seeds_override = parse_seed_list(seeds_flag);
  }

  svrsqp::ExperimentOutcome outcome = svrsqp::run_experiment(config, options);

  std::cout << "solver: " << outcome.solver << "\n";
  for (const svrsqp::RunResult& run : outcome.runs) {
    std::cout << "  seed " << run.seed << ": best feasibility " << run.best.feasibility_inf
              << ", best stationarity " << run.best.stationarity_inf << " (" << run.iterations
              << " iterations, " << run.wall_seconds << " s)\n";
  }
  if (outcome.aggregate) {
    std::cout << "aggregate over " << outcome.aggregate->runs
              << " runs: feasibility " << outcome.aggregate->feasibility.mean << " +/- "
              << outcome.aggregate->feasibility.halfwidth95 << ", stationarity "
              << outcome.aggregate->stationarity.mean << " +/- "
              << outcome.aggregate->stationarity.halfwidth95 << "\n";
  }
  std::cout << "outputs written to " << outcome.out_dir << "\n";
  return kExitOk;
}

int do_validate(const std::string& config_path) {
  svrsqp::ExperimentConfig config = svrsqp::load_config(config_path);
  svrsqp::ValidationReport report = svrsqp::validate_experiment(config);
  std::cout << "config ok: solver " << svrsqp::solver_name(config.solver) << ", dataset "
            << config.dataset_path << " (" << report.num_samples << " samples, "
            << report.num_features << " features)";
  if (report.inner_length > 0) {
    std::cout << ", inner length " << report.inner_length;
  }
  std::cout << ", " << config.seeds.size() << " seeds\n";
  return kExitOk;
}

int do_info(const std::string& dataset_path) {
  if (!std::filesystem::exists(dataset_path)) {
    std::cerr << "error: dataset file not found: " << dataset_path << "\n";
    return kExitConfig;
  }
  svrsqp::Dataset dataset = svrsqp::load_libsvm_file(dataset_path);
  long long positives = (dataset.labels.array() > 0).count();
  long long negatives = (dataset.labels.array() < 0).count();
  double cells = static_cast<double>(dataset.num_samples()) * dataset.num_features();
  std::cout << "samples:  " << dataset.num_samples() << "\n"
            << "features: " << dataset.num_features() << "\n"
            << "labels:   +1 x " << positives << ", -1 x " << negatives << "\n"
            << "nonzeros: " << dataset.features.nonZeros() << " (density "
            << (cells > 0 ? dataset.features.nonZeros() / cells : 0.0) << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-reduced stochastic SQP for equality-constrained finite-sum minimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string dataset_path;
  std::string out_dir_flag;
  std::string seeds_flag;
  int threads = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the configured experiment and write CSVs");
  run_cmd->add_option("config", config_path, "JSON experiment config")->required();
  run_cmd->add_option("--out-dir", out_dir_flag,
                      "Output directory (overrides SVRSQP_OUT_DIR and the config)");
  run_cmd->add_option("--seeds", seeds_flag, "Comma-separated seeds overriding the config");
  run_cmd->add_option("--threads", threads,
                      "Worker threads; 1 forces sequential, 0 uses one per hardware thread");

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a config and its dataset without running");
  validate_cmd->add_option("config", config_path, "JSON experiment config")->required();

  CLI::App* info_cmd = app.add_subcommand("info", "Print dataset shape and label counts");
  info_cmd->add_option("dataset", dataset_path, "Dataset in sparse index:value format")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) {
      return do_run(config_path, out_dir_flag, seeds_flag, threads);
    }
    if (validate_cmd->parsed()) {
      return do_validate(config_path);
    }
    return do_info(dataset_path);
  } catch (const svrsqp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const svrsqp::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const svrsqp::LabelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
