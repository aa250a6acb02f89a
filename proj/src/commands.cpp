#include "mirrorcoin/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "mirrorcoin/io.hpp"
#include "mirrorcoin/metrics.hpp"

#ifndef MIRRORCOIN_VERSION
#define MIRRORCOIN_VERSION "0.0.0"
#endif

namespace mirrorcoin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<MirrorMap> make_map(const ExperimentConfig& cfg, const ConstrainedTarget& target) {
  if (!cfg.map || cfg.uses_mied || is_projected(cfg.run.sampler)) return std::nullopt;
  return *cfg.map == MapKind::EntropicSimplex ? MirrorMap::entropic_simplex(target.dim())
                                              : MirrorMap::positive_orthant(target.dim());
}

std::vector<std::string> effective_metrics(const ExperimentConfig& cfg,
                                           const std::optional<GroundTruthSource>& gt) {
  if (!cfg.metrics.empty()) return cfg.metrics;
  if (gt) return {"energy_distance"};
  return {};
}

double ksd_of(const Cloud& dual, const MirroredTarget& mt) {
  return ksd_report(dual, mt, KernelFamily::IMQ).value;
}

json describe(const ExperimentConfig& cfg) {
  json j;
  j["sampler"] = cfg.sampler;
  j["target"] = cfg.target.kind;
  if (cfg.uses_mied) {
    j["stepper"] = to_string(cfg.mied.stepper.kind);
    if (!cfg.is_coin()) j["lr"] = cfg.mied.stepper.lr;
    j["particles"] = cfg.mied.particles;
    j["iterations"] = cfg.mied.iterations;
    j["seed"] = cfg.mied.seed;
    j["init"] = to_string(cfg.mied.init);
  } else {
    j["stepper"] = to_string(cfg.run.stepper.kind);
    if (!cfg.is_coin()) j["lr"] = cfg.run.stepper.lr;
    j["particles"] = cfg.run.particles;
    j["iterations"] = cfg.run.iterations;
    j["seed"] = cfg.run.seed;
    j["init"] = to_string(cfg.run.init);
    j["map"] = cfg.map ? to_string(*cfg.map) : "none";
  }
  return j;
}

json base_meta(const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = MIRRORCOIN_VERSION;
  j["rng"] = "mt19937_64 seeded by splitmix64(master, purpose, index)";
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
               "." + std::to_string(EIGEN_MINOR_VERSION);
#ifdef __VERSION__
  j["compiler"] = __VERSION__;
#endif
  return j;
}

std::string trace_csv(const RunRecord& rec) {
  std::string out = "iteration,metric,value\n";
  for (const auto& row : rec.rows) {
    out += std::to_string(row.iteration) + "," + row.metric + "," + io::format_double(row.value) + "\n";
  }
  return out;
}

fs::path output_dir(const ExperimentConfig& cfg, const std::optional<fs::path>& out) {
  if (out) return *out;
  if (!cfg.output.empty()) return cfg.output;
  throw ConfigError("output", "no output directory; pass --out or set output");
}

void report_config_error(const ConfigError& e, std::ostream& log) {
  for (const auto& v : e.violations()) log << "config error: " << v.key << ": " << v.reason << "\n";
}

}  // namespace

std::optional<GroundTruthSource> resolve_ground_truth(const ExperimentConfig& cfg,
                                                      const ConstrainedTarget& target) {
  if (cfg.ground_truth != "builtin") {
    Cloud samples;
    try {
      samples = io::read_cloud_csv(cfg.ground_truth);
    } catch (const std::exception& e) {
      throw ConfigError("ground_truth", e.what());
    }
    if (samples.cols() != target.dim() || samples.rows() < 1) {
      throw ConfigError("ground_truth", "sample file does not match the target dimension");
    }
    return GroundTruthSource{std::move(samples), "file:" + cfg.ground_truth};
  }
  try {
    Rng rng = make_stream(cfg.ground_truth_seed, StreamTag::GroundTruth);
    GroundTruth gt = target.sample_ground_truth(cfg.ground_truth_n, rng);
    return GroundTruthSource{std::move(gt.samples), gt.method};
  } catch (const Unsupported&) {
    return std::nullopt;
  }
}

RunOutcome execute(const ExperimentConfig& cfg, const TargetPtr& target,
                   const std::optional<GroundTruthSource>& ground_truth) {
  const auto metrics = effective_metrics(cfg, ground_truth);
  const bool want_ed = std::count(metrics.begin(), metrics.end(), "energy_distance") > 0;
  if (want_ed && !ground_truth) {
    throw Unsupported(target->name() + ": energy distance needs ground-truth samples");
  }
  const auto map = make_map(cfg, *target);
  std::optional<MirroredTarget> mt;
  if (map) mt.emplace(target, *map);

  MetricHook hook = [&](long, const Cloud& x, const Cloud* y) {
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& name : metrics) {
      if (name == "energy_distance") {
        rows.emplace_back(name, energy_distance(x, ground_truth->samples));
      } else if (name == "ksd" && y && mt) {
        rows.emplace_back(name, ksd_of(*y, *mt));
      } else if (name == "mean") {
        const Vec mean = x.colwise().mean().transpose();
        for (Eigen::Index k = 0; k < mean.size(); ++k) {
          rows.emplace_back("mean_x" + std::to_string(k + 1), mean[k]);
        }
      }
    }
    return rows;
  };

  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    outcome.record = cfg.uses_mied ? run_mied(cfg.mied, target, hook) : run(cfg.run, target, map, hook);
  } catch (const RunAborted& e) {
    outcome.record = e.partial();
    outcome.failed = true;
    outcome.failure_iteration = e.iteration();
    outcome.failure_message = e.what();
  }
  outcome.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

double final_metric(const std::string& name, const ExperimentConfig& cfg, const TargetPtr& target,
                    const RunOutcome& outcome, const std::optional<GroundTruthSource>& ground_truth) {
  if (name == "energy_distance") {
    if (!ground_truth) throw Unsupported(target->name() + ": energy distance needs ground-truth samples");
    return energy_distance(outcome.record.final_primal, ground_truth->samples);
  }
  if (name == "ksd") {
    const auto map = make_map(cfg, *target);
    if (!map || !outcome.record.final_dual) throw ConfigError("sweep.metric", "ksd needs a mirrored sampler");
    return ksd_of(*outcome.record.final_dual, MirroredTarget(target, *map));
  }
  throw ConfigError("sweep.metric", "unknown metric '" + name + "'");
}

int cmd_sample(const fs::path& config, std::optional<std::uint64_t> seed, std::optional<fs::path> out,
               std::ostream& log) {
  try {
    ExperimentConfig cfg = load_config(config);
    if (seed) cfg.set_seed(*seed);
    const fs::path dir = output_dir(cfg, out);
    const TargetPtr target = build_target(cfg.target);
    const auto gt = resolve_ground_truth(cfg, *target);
    const RunOutcome outcome = execute(cfg, target, gt);

    fs::create_directories(dir);
    io::write_cloud_csv(dir / "particles_final.csv", outcome.record.final_primal, "x");
    if (outcome.record.final_dual) io::write_cloud_csv(dir / "dual_final.csv", *outcome.record.final_dual, "y");
    io::write_text(dir / "trace.csv", trace_csv(outcome.record));

    json meta = base_meta("sample");
    meta["config"] = cfg.entries;
    meta["resolved"] = describe(cfg);
    meta["seed"] = cfg.seed();
    meta["iterations_completed"] = outcome.record.iterations;
    meta["ground_truth"] = gt ? json(gt->method) : json(nullptr);
    meta["wall_time_ms"] = outcome.wall_ms;
    meta["status"] = outcome.failed ? "numeric_failure" : "ok";
    if (outcome.failed) {
      meta["failure_iteration"] = outcome.failure_iteration;
      meta["failure"] = outcome.failure_message;
    }
    io::write_text(dir / "meta.json", meta.dump(2) + "\n");
    if (outcome.failed) {
      log << "numeric failure at iteration " << outcome.failure_iteration << ": "
          << outcome.failure_message << "\n";
      return kExitNumeric;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return kExitConfig;
  } catch (const Unsupported& e) {
    log << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    log << "numeric failure at iteration " << e.iteration() << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_sweep(const fs::path& config, const std::vector<double>& lrs,
              const std::vector<std::uint64_t>& seeds, std::optional<fs::path> out, std::ostream& log) {
  try {
    const ExperimentConfig base = load_config(config);
    if (lrs.empty()) throw ConfigError("lrs", "at least one learning rate is required");
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    for (double lr : lrs) {
      if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lrs", "learning rates must be positive");
    }
    const fs::path dir = output_dir(base, out);
    const ExperimentConfig coin = coin_counterpart(base);
    const TargetPtr target = build_target(base.target);
    const auto gt = resolve_ground_truth(base, *target);
    if (base.sweep_metric == "energy_distance" && !gt) {
      throw Unsupported(target->name() + ": energy distance needs ground-truth samples");
    }

    struct Job {
      ExperimentConfig cfg;
      std::optional<double> lr;
      std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double lr : lrs) {
      for (std::uint64_t s : seeds) {
        Job job{with_learning_rate(base, lr), lr, s};
        job.cfg.set_seed(s);
        jobs.push_back(std::move(job));
      }
    }
    for (std::uint64_t s : seeds) {
      Job job{coin, std::nullopt, s};
      job.cfg.set_seed(s);
      jobs.push_back(std::move(job));
    }

    struct Row {
      std::string sampler;
      std::optional<double> lr;
      std::uint64_t seed;
      double value;
      std::string status;
    };
    std::vector<Row> rows(jobs.size());
    const auto start = std::chrono::steady_clock::now();
    const auto n_jobs = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n_jobs; ++k) {
      const Job& job = jobs[static_cast<std::size_t>(k)];
      Row row{job.cfg.sampler, job.lr, job.seed, std::numeric_limits<double>::quiet_NaN(), "ok"};
      try {
        const RunOutcome outcome = execute(job.cfg, target, gt);
        row.value = final_metric(base.sweep_metric, job.cfg, target, outcome, gt);
        if (outcome.failed) row.status = "failed@" + std::to_string(outcome.failure_iteration);
      } catch (const std::exception& e) {
        row.status = "error";
      }
      rows[static_cast<std::size_t>(k)] = row;
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      const double la = a.lr.value_or(std::numeric_limits<double>::infinity());
      const double lb = b.lr.value_or(std::numeric_limits<double>::infinity());
      return std::tie(a.sampler, la, a.seed) < std::tie(b.sampler, lb, b.seed);
    });

    std::string csv = "sampler,lr,seed,final_metric,status\n";
    for (const auto& r : rows) {
      csv += r.sampler + "," + (r.lr ? io::format_double(*r.lr) : "NA") + "," + std::to_string(r.seed) +
             "," + io::format_double(r.value) + "," + r.status + "\n";
    }
    fs::create_directories(dir);
    io::write_text(dir / "sweep.csv", csv);
    json meta = base_meta("sweep");
    meta["config"] = base.entries;
    meta["baseline"] = describe(base);
    meta["coin"] = describe(coin);
    meta["lrs"] = lrs;
    meta["seeds"] = seeds;
    meta["metric"] = base.sweep_metric;
    meta["ground_truth"] = gt ? json(gt->method) : json(nullptr);
    meta["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    io::write_text(dir / "meta.json", meta.dump(2) + "\n");
    for (const auto& r : rows) {
      if (r.status != "ok") log << "sub-run " << r.sampler << " seed " << r.seed << ": " << r.status << "\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return kExitConfig;
  } catch (const Unsupported& e) {
    log << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_ground_truth(const fs::path& config, std::optional<int> n, std::optional<std::uint64_t> seed,
                     const fs::path& out, std::ostream& log) {
  try {
    const ExperimentConfig cfg = load_config(config);
    const int count = n.value_or(cfg.ground_truth_n);
    if (count < 1) throw ConfigError("n", "must be >= 1");
    const std::uint64_t s = seed.value_or(cfg.ground_truth_seed);
    const TargetPtr target = build_target(cfg.target);
    Rng rng = make_stream(s, StreamTag::GroundTruth);
    const GroundTruth gt = target->sample_ground_truth(count, rng);
    io::write_cloud_csv(out, gt.samples, "x");
    json meta = base_meta("ground-truth");
    meta["target"] = cfg.target.kind;
    meta["n"] = count;
    meta["seed"] = s;
    meta["method"] = gt.method;
    io::write_text(fs::path(out.string() + ".meta.json"), meta.dump(2) + "\n");
    return kExitOk;
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return kExitConfig;
  } catch (const Unsupported& e) {
    log << "unsupported: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_metrics(const fs::path& a, const fs::path& b, std::optional<fs::path> out,
                std::ostream& stdout_stream, std::ostream& log) {
  try {
    const Cloud ca = io::read_cloud_csv(a);
    const Cloud cb = io::read_cloud_csv(b);
    if (ca.rows() < 1 || cb.rows() < 1) throw ConfigError("input", "sample files need at least one row");
    if (ca.cols() != cb.cols()) throw ConfigError("input", "sample files differ in dimension");
    const MetricReport rep = energy_distance_report(ca, cb);
    stdout_stream << rep.name << "," << io::format_double(rep.value) << "\n";
    if (out) {
      io::write_text(*out, "name,value,n_a,n_b\n" + rep.name + "," + io::format_double(rep.value) + "," +
                               std::to_string(rep.n_a) + "," + std::to_string(rep.n_b) + "\n");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    report_config_error(e, log);
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace mirrorcoin
