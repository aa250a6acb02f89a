#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mirrorcoin/coin.hpp"
#include "mirrorcoin/kernels.hpp"
#include "mirrorcoin/targets.hpp"

namespace mirrorcoin {

enum class SamplerKind {
  MSVGD,
  CoinMSVGD,
  MLA,
  MKSDD,
  CoinMKSDD,
  MLAWGD,
  CoinMLAWGD,
  SVGDProjected,
  CoinSVGDProjected,
};

std::string to_string(SamplerKind kind);
std::optional<SamplerKind> sampler_from_string(const std::string& name);
bool is_coin(SamplerKind kind);
bool is_projected(SamplerKind kind);

enum class StepperKind { FixedLR, RMSProp, CoinKT, CoinAdaptive };

std::string to_string(StepperKind kind);

struct StepperConfig {
  StepperKind kind = StepperKind::CoinAdaptive;
  double lr = 0.0;           // FixedLR and RMSProp only
  double decay = 0.9;        // RMSProp
  double eps = 1e-8;         // RMSProp
  CoinGuard guard = CoinGuard::None;
  double kt_scale = 1.0;     // CoinKT outcome normaliser
};

/// Initial cloud distribution, drawn i.i.d. per particle.
struct InitSpec {
  enum class Kind { Dirichlet, Uniform, Exponential, LogNormal };
  Kind kind = Kind::Dirichlet;
  double a = 5.0;  // Dirichlet concentration, uniform lo, exponential rate, lognormal mu
  double b = 0.0;  // uniform hi, lognormal sigma
};

/// Parses "dirichlet:5", "uniform:lo:hi", "exponential:rate", "lognormal:mu:sigma".
InitSpec parse_init_spec(const std::string& text);
std::string to_string(const InitSpec& spec);

/// n draws in the free coordinates of the domain. Dirichlet draws use all
/// d+1 coordinates and drop the last; draws on the floor are resampled.
Cloud draw_initial(const InitSpec& spec, const Domain& domain, int n, Rng& rng);

/// Euclidean projection onto {x in closed domain} shrunk by kInteriorFloor:
/// simplex {x >= floor, sum x <= 1 - floor}, orthant x >= floor, box
/// [lo + floor, hi - floor].
Vec project_to_domain(const Domain& domain, VecRef x);

struct MetricRow {
  long iteration;
  std::string metric;
  double value;
  double wall_ms;
};

struct RunRecord {
  std::vector<MetricRow> rows;
  Cloud initial_primal;
  Cloud final_primal;
  std::optional<Cloud> final_dual;
  long iterations = 0;
};

/// Numerical failure during a run, carrying the record up to the last
/// iteration whose particles were still valid.
class RunAborted : public NumericalFailure {
 public:
  RunAborted(const NumericalFailure& cause, RunRecord partial)
      : NumericalFailure(cause.what(), cause.iteration()), partial_(std::move(partial)) {}
  const RunRecord& partial() const { return partial_; }

 private:
  RunRecord partial_;
};

/// Called with (iteration, primal cloud, dual cloud or null); returns named
/// metric values to append to the trace.
using MetricHook =
    std::function<std::vector<std::pair<std::string, double>>(long, const Cloud&, const Cloud*)>;

enum class Execution { Parallel, Serial };

struct RunConfig {
  SamplerKind sampler = SamplerKind::CoinMSVGD;
  KernelConfig kernel;
  StepperConfig stepper;
  InitSpec init;
  int particles = 50;
  long iterations = 500;
  std::uint64_t seed = 0;
  int metric_every = 10;     // hooks fire at t = 0, every metric_every, and at T
  int spectral_order = 30;   // Hermite kernel truncation for MLAWGD
  Execution execution = Execution::Parallel;
};

/// Rejects incompatible sampler / stepper / map / target combinations.
void validate(const RunConfig& cfg, const ConstrainedTarget& target,
              const std::optional<MirrorMap>& map);

/// Executes T iterations of the configured sampler. Mirrored samplers need a
/// map matching the target domain; projected samplers ignore it.
/// Throws ConfigError for invalid combinations and RunAborted when the
/// particles leave the representable range.
RunRecord run(const RunConfig& cfg, const TargetPtr& target, const std::optional<MirrorMap>& map,
              const MetricHook& hook = {});

/// Same, starting from a given primal cloud instead of cfg.init.
RunRecord run_from(const RunConfig& cfg, const TargetPtr& target,
                   const std::optional<MirrorMap>& map, const Cloud& x0,
                   const MetricHook& hook = {});

/// One Langevin step in dual space: y + h s_nu(y) + sqrt(2h) xi per particle.
Cloud mla_step(const Cloud& y, const MirroredTarget& mt, double h, Rng& rng);

/// Applies learning-rate steppers (FixedLR, RMSProp) to a cloud in place.
class GradientStepper {
 public:
  GradientStepper(StepperConfig cfg, Eigen::Index rows, Eigen::Index cols);
  void apply(Cloud& position, const Cloud& direction);

 private:
  StepperConfig cfg_;
  Cloud second_moment_;
};

}  // namespace mirrorcoin
