#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirrorcoin/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Mirrored Stein samplers with coin-betting steps"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<double> lrs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;

  auto* sample = app.add_subcommand("sample", "Run one sampler and write the final cloud");
  sample->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  auto* sample_seed = sample->add_option("--seed", seed, "Override the run seed");
  auto* sample_out = sample->add_option("--out", out, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Learning-rate sweep of a baseline against its coin counterpart");
  sweep->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--lrs", lrs, "Learning rates")->required()->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds")->required()->delimiter(',');
  auto* sweep_out = sweep->add_option("--out", out, "Output directory");

  auto* gt = app.add_subcommand("ground-truth", "Draw reference samples from the target");
  gt->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  auto* gt_n = gt->add_option("--n", n, "Sample count");
  auto* gt_seed = gt->add_option("--seed", seed, "Ground-truth seed");
  gt->add_option("--out", out, "Output CSV")->required();

  auto* metrics = app.add_subcommand("metrics", "Energy distance between two sample files");
  metrics->add_option("inputs", inputs, "Two CSV files")->required()->expected(2)->check(CLI::ExistingFile);
  auto* metrics_out = metrics->add_option("--out", out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mirrorcoin::kExitConfig;
  }

  auto opt_path = [&](CLI::Option* o) { return *o ? std::optional<fs::path>(out) : std::nullopt; };
  auto opt_seed = [&](CLI::Option* o) { return *o ? std::optional<std::uint64_t>(seed) : std::nullopt; };

  if (*sample) return mirrorcoin::cmd_sample(config, opt_seed(sample_seed), opt_path(sample_out), std::cerr);
  if (*sweep) return mirrorcoin::cmd_sweep(config, lrs, seeds, opt_path(sweep_out), std::cerr);
  if (*gt) {
    return mirrorcoin::cmd_ground_truth(config, *gt_n ? std::optional<int>(n) : std::nullopt,
                                        opt_seed(gt_seed), out, std::cerr);
  }
  return mirrorcoin::cmd_metrics(inputs.at(0), inputs.at(1), opt_path(metrics_out), std::cout, std::cerr);
}
