#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirrorcoin/mied.hpp"
#include "mirrorcoin/samplers.hpp"

namespace mirrorcoin {

/// Target description as written in a config file.
struct TargetSpec {
  std::string kind = "sparse_dirichlet";
  int dim = 20;
  // sparse_dirichlet: d+1 entries each
  Vec alpha;
  Vec counts;
  // quadratic temperature, or lognormal log-scale
  double sigma = 1.0;
  // uniform_box
  double lo = -1.0;
  double hi = 1.0;
  // exponential
  double rate = 1.0;
  // lognormal
  double mu = 0.0;
  // selective_lasso
  int lasso_n = 100;
  int lasso_p = 20;
  double lasso_rho = 0.3;
  double lasso_lambda = 1.0;
  double lasso_tau = 1.0;
  // Seed for any data the target draws (random matrix, synthetic design).
  std::uint64_t data_seed = 0;
};

TargetPtr build_target(const TargetSpec& spec);

/// Fully validated experiment description.
struct ExperimentConfig {
  TargetSpec target;
  std::optional<MapKind> map;
  std::string sampler;  // one of the run-loop samplers, or mied / coin_mied
  bool uses_mied = false;
  RunConfig run;
  MiedConfig mied;
  std::string ground_truth = "builtin";  // or a CSV path
  int ground_truth_n = 1000;
  std::uint64_t ground_truth_seed = 0;
  // energy_distance, ksd, mean; empty means energy_distance whenever a
  // ground truth is available.
  std::vector<std::string> metrics;
  std::string sweep_metric = "energy_distance";
  std::string output;
  std::map<std::string, std::string> entries;  // normalised key/value echo

  std::uint64_t seed() const { return uses_mied ? mied.seed : run.seed; }
  void set_seed(std::uint64_t seed);
  bool is_coin() const;
};

/// Parses the flat key = value format ('#' starts a comment, dotted keys
/// name sub-fields). Collects every violation before throwing ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Copy of a baseline config switched to its coin counterpart (coin
/// adaptive stepper, no learning rate).
ExperimentConfig coin_counterpart(const ExperimentConfig& baseline);

/// Copy of a learning-rate config with the rate replaced.
ExperimentConfig with_learning_rate(const ExperimentConfig& cfg, double lr);

}  // namespace mirrorcoin
