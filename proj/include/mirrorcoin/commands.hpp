#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mirrorcoin/config.hpp"

namespace mirrorcoin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;

struct GroundTruthSource {
  Cloud samples;
  std::string method;
};

/// Builtin oracle draw or CSV file, as the config says. Empty when the
/// target has no builtin oracle and no file was named.
std::optional<GroundTruthSource> resolve_ground_truth(const ExperimentConfig& cfg,
                                                      const ConstrainedTarget& target);

struct RunOutcome {
  RunRecord record;
  bool failed = false;
  long failure_iteration = 0;
  std::string failure_message;
  double wall_ms = 0.0;
};

/// Runs one experiment with the metric hooks the config asks for. Numerical
/// failures are reported in the outcome; config problems throw ConfigError.
RunOutcome execute(const ExperimentConfig& cfg, const TargetPtr& target,
                   const std::optional<GroundTruthSource>& ground_truth);

/// Value of the named metric on the final cloud of an outcome.
double final_metric(const std::string& name, const ExperimentConfig& cfg, const TargetPtr& target,
                    const RunOutcome& outcome, const std::optional<GroundTruthSource>& ground_truth);

int cmd_sample(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
               std::optional<std::filesystem::path> out, std::ostream& log);

int cmd_sweep(const std::filesystem::path& config, const std::vector<double>& lrs,
              const std::vector<std::uint64_t>& seeds, std::optional<std::filesystem::path> out,
              std::ostream& log);

int cmd_ground_truth(const std::filesystem::path& config, std::optional<int> n,
                     std::optional<std::uint64_t> seed, const std::filesystem::path& out,
                     std::ostream& log);

/// Energy distance between two sample CSV files, printed as "energy_distance,<value>".
int cmd_metrics(const std::filesystem::path& a, const std::filesystem::path& b,
                std::optional<std::filesystem::path> out, std::ostream& stdout_stream,
                std::ostream& log);

}  // namespace mirrorcoin
