#include "mirrorcoin/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "mirrorcoin/pairwise.hpp"
#include "mirrorcoin/spectral.hpp"

namespace mirrorcoin {

namespace {

struct SamplerName {
  SamplerKind kind;
  const char* name;
};

constexpr SamplerName kSamplerNames[] = {
    {SamplerKind::MSVGD, "msvgd"},
    {SamplerKind::CoinMSVGD, "coin_msvgd"},
    {SamplerKind::MLA, "mla"},
    {SamplerKind::MKSDD, "mksdd"},
    {SamplerKind::CoinMKSDD, "coin_mksdd"},
    {SamplerKind::MLAWGD, "mlawgd"},
    {SamplerKind::CoinMLAWGD, "coin_mlawgd"},
    {SamplerKind::SVGDProjected, "svgd_projected"},
    {SamplerKind::CoinSVGDProjected, "coin_svgd_projected"},
};

}  // namespace

std::string to_string(SamplerKind kind) {
  for (const auto& s : kSamplerNames) {
    if (s.kind == kind) return s.name;
  }
  return "unknown";
}

std::optional<SamplerKind> sampler_from_string(const std::string& name) {
  for (const auto& s : kSamplerNames) {
    if (name == s.name) return s.kind;
  }
  return std::nullopt;
}

bool is_coin(SamplerKind kind) {
  return kind == SamplerKind::CoinMSVGD || kind == SamplerKind::CoinMKSDD ||
         kind == SamplerKind::CoinMLAWGD || kind == SamplerKind::CoinSVGDProjected;
}

bool is_projected(SamplerKind kind) {
  return kind == SamplerKind::SVGDProjected || kind == SamplerKind::CoinSVGDProjected;
}

std::string to_string(StepperKind kind) {
  switch (kind) {
    case StepperKind::FixedLR: return "fixed";
    case StepperKind::RMSProp: return "rmsprop";
    case StepperKind::CoinKT: return "coin_kt";
    case StepperKind::CoinAdaptive: return "coin_adaptive";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Initialisation

InitSpec parse_init_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("init", "malformed number in init spec '" + text + "'");
    }
  };
  if (parts.empty()) throw ConfigError("init", "empty init spec");
  InitSpec spec;
  const std::string& head = parts[0];
  if (head == "dirichlet" && parts.size() == 2) {
    spec = {InitSpec::Kind::Dirichlet, number(1), 0.0};
    if (!(spec.a > 0.0)) throw ConfigError("init", "dirichlet concentration must be > 0");
  } else if (head == "uniform" && parts.size() == 3) {
    spec = {InitSpec::Kind::Uniform, number(1), number(2)};
    if (!(spec.a < spec.b)) throw ConfigError("init", "uniform needs lo < hi");
  } else if (head == "exponential" && parts.size() == 2) {
    spec = {InitSpec::Kind::Exponential, number(1), 0.0};
    if (!(spec.a > 0.0)) throw ConfigError("init", "exponential rate must be > 0");
  } else if (head == "lognormal" && parts.size() == 3) {
    spec = {InitSpec::Kind::LogNormal, number(1), number(2)};
    if (!(spec.b > 0.0)) throw ConfigError("init", "lognormal sigma must be > 0");
  } else {
    throw ConfigError("init", "unknown init spec '" + text + "'");
  }
  return spec;
}

std::string to_string(const InitSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  switch (spec.kind) {
    case InitSpec::Kind::Dirichlet: os << "dirichlet:" << spec.a; break;
    case InitSpec::Kind::Uniform: os << "uniform:" << spec.a << ':' << spec.b; break;
    case InitSpec::Kind::Exponential: os << "exponential:" << spec.a; break;
    case InitSpec::Kind::LogNormal: os << "lognormal:" << spec.a << ':' << spec.b; break;
  }
  return os.str();
}

Cloud draw_initial(const InitSpec& spec, const Domain& domain, int n, Rng& rng) {
  if (n < 1) throw ConfigError("particles", "must be >= 1");
  const int d = domain.dim;
  if (spec.kind == InitSpec::Kind::Dirichlet && domain.kind != DomainKind::Simplex) {
    throw ConfigError("init", "dirichlet init needs a simplex target");
  }
  if ((spec.kind == InitSpec::Kind::Exponential || spec.kind == InitSpec::Kind::LogNormal) &&
      domain.kind == DomainKind::Simplex) {
    throw ConfigError("init", "orthant init distributions do not fit the simplex");
  }
  std::gamma_distribution<double> gamma(spec.kind == InitSpec::Kind::Dirichlet ? spec.a : 1.0, 1.0);
  std::uniform_real_distribution<double> unif(spec.a, spec.kind == InitSpec::Kind::Uniform ? spec.b : 1.0);
  std::exponential_distribution<double> expo(spec.kind == InitSpec::Kind::Exponential ? spec.a : 1.0);
  std::lognormal_distribution<double> lognorm(spec.a, spec.kind == InitSpec::Kind::LogNormal ? spec.b : 1.0);

  Cloud out(n, d);
  Vec row(d);
  Vec g(d + 1);
  constexpr int kMaxAttempts = 1000;
  for (int i = 0; i < n; ++i) {
    int attempt = 0;
    do {
      if (++attempt > kMaxAttempts) {
        throw ConfigError("init", "init distribution does not place mass inside the domain");
      }
      switch (spec.kind) {
        case InitSpec::Kind::Dirichlet:
          for (int k = 0; k <= d; ++k) g[k] = gamma(rng);
          row = g.head(d) / g.sum();
          break;
        case InitSpec::Kind::Uniform:
          for (int k = 0; k < d; ++k) row[k] = unif(rng);
          break;
        case InitSpec::Kind::Exponential:
          for (int k = 0; k < d; ++k) row[k] = expo(rng);
          break;
        case InitSpec::Kind::LogNormal:
          for (int k = 0; k < d; ++k) row[k] = lognorm(rng);
          break;
      }
    } while (!domain.contains(row));
    out.row(i) = row.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Projection

namespace {

// Projection of z onto {z >= 0, sum z <= radius}.
Vec project_capped_simplex(Vec z, double radius) {
  const Vec clamped = z.cwiseMax(0.0);
  if (clamped.sum() <= radius) return clamped;
  // Project onto {z >= 0, sum z = radius} by the sorting method.
  std::vector<double> u(z.data(), z.data() + z.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double candidate = (cumsum - radius) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) theta = candidate;
  }
  return (z.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace

Vec project_to_domain(const Domain& domain, VecRef x) {
  if (x.size() != domain.dim) throw std::invalid_argument("project_to_domain: dimension mismatch");
  constexpr double f = kInteriorFloor;
  switch (domain.kind) {
    case DomainKind::Orthant:
      return x.cwiseMax(f);
    case DomainKind::Box:
      return x.cwiseMax(domain.lo + f).cwiseMin(domain.hi - f);
    case DomainKind::Simplex: {
      const double radius = 1.0 - static_cast<double>(domain.dim + 1) * f;
      Vec z = project_capped_simplex((x.array() - f).matrix(), radius);
      return (z.array() + f).matrix();
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Steppers

GradientStepper::GradientStepper(StepperConfig cfg, Eigen::Index rows, Eigen::Index cols)
    : cfg_(cfg), second_moment_(Cloud::Zero(rows, cols)) {
  if (cfg_.kind != StepperKind::FixedLR && cfg_.kind != StepperKind::RMSProp) {
    throw std::invalid_argument("GradientStepper handles FixedLR and RMSProp only");
  }
}

void GradientStepper::apply(Cloud& position, const Cloud& direction) {
  if (cfg_.kind == StepperKind::FixedLR) {
    position += cfg_.lr * direction;
    return;
  }
  second_moment_ = cfg_.decay * second_moment_ + (1.0 - cfg_.decay) * direction.cwiseAbs2();
  position.array() += cfg_.lr * direction.array() / (second_moment_.array() + cfg_.eps).sqrt();
}

Cloud mla_step(const Cloud& y, const MirroredTarget& mt, double h, Rng& rng) {
  if (h < 0.0) throw std::invalid_argument("mla_step: step size must be >= 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double noise_scale = std::sqrt(2.0 * h);
  Cloud next = y;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const Vec s = mt.dual_score(y.row(i).transpose());
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      // The noise is drawn even when h = 0 so the stream stays aligned.
      const double xi = normal(rng);
      next(i, k) += h * s[k] + noise_scale * xi;
    }
  }
  return next;
}

// ---------------------------------------------------------------------------
// Run loop

void validate(const RunConfig& cfg, const ConstrainedTarget& target,
              const std::optional<MirrorMap>& map) {
  std::vector<ConfigViolation> errs;
  const bool coin = is_coin(cfg.sampler);
  const StepperKind sk = cfg.stepper.kind;
  const bool coin_stepper = sk == StepperKind::CoinKT || sk == StepperKind::CoinAdaptive;
  if (cfg.particles < 1) errs.push_back({"particles", "must be >= 1"});
  if (cfg.iterations < 0) errs.push_back({"iterations", "must be >= 0"});
  if (cfg.metric_every < 1) errs.push_back({"metrics.every", "must be >= 1"});
  if (coin) {
    if (!coin_stepper) errs.push_back({"stepper", "coin samplers need a coin stepper"});
    if (cfg.stepper.lr != 0.0) {
      errs.push_back({"stepper.lr", "learning-rate key forbidden for coin steppers"});
    }
    if (sk == StepperKind::CoinKT && !(cfg.stepper.kt_scale > 0.0)) {
      errs.push_back({"stepper.kt_scale", "must be > 0"});
    }
  } else {
    if (coin_stepper) errs.push_back({"stepper", "coin steppers need a coin sampler"});
    if (cfg.sampler == SamplerKind::MLA && sk != StepperKind::FixedLR) {
      errs.push_back({"stepper", "mla uses the fixed stepper; lr is the Langevin step size"});
    }
    if (!coin_stepper && !(cfg.stepper.lr > 0.0)) errs.push_back({"stepper.lr", "must be > 0"});
    if (sk == StepperKind::RMSProp &&
        (!(cfg.stepper.decay > 0.0 && cfg.stepper.decay < 1.0) || !(cfg.stepper.eps > 0.0))) {
      errs.push_back({"stepper", "rmsprop needs decay in (0,1) and eps > 0"});
    }
  }
  if (cfg.kernel.fixed_bandwidth && !(*cfg.kernel.fixed_bandwidth > 0.0)) {
    errs.push_back({"kernel.bandwidth", "must be > 0"});
  }
  const Domain dom = target.domain();
  if (!is_projected(cfg.sampler)) {
    if (!map) {
      errs.push_back({"map", "mirrored samplers need a mirror map for this target"});
    } else {
      const bool kind_ok = (map->kind() == MapKind::EntropicSimplex && dom.kind == DomainKind::Simplex) ||
                           (map->kind() == MapKind::PositiveOrthant && dom.kind == DomainKind::Orthant);
      if (!kind_ok) errs.push_back({"map", "mirror map does not match the target domain"});
      if (map->dim() != dom.dim) errs.push_back({"map", "mirror map dimension differs from the target"});
    }
  }
  if (cfg.sampler == SamplerKind::MLAWGD || cfg.sampler == SamplerKind::CoinMLAWGD) {
    if (dom.dim != 1) errs.push_back({"sampler", "mlawgd ships a one-dimensional spectral kernel only"});
    if (cfg.spectral_order < 1) errs.push_back({"kernel.order", "must be >= 1"});
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

namespace {

bool uses_kernel(SamplerKind k) {
  return k != SamplerKind::MLA && k != SamplerKind::MLAWGD && k != SamplerKind::CoinMLAWGD;
}

class RunClock {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

RunRecord run(const RunConfig& cfg, const TargetPtr& target, const std::optional<MirrorMap>& map,
              const MetricHook& hook) {
  validate(cfg, *target, map);
  Rng init_rng = make_stream(cfg.seed, StreamTag::Init);
  const Cloud x0 = draw_initial(cfg.init, target->domain(), cfg.particles, init_rng);
  return run_from(cfg, target, map, x0, hook);
}

RunRecord run_from(const RunConfig& cfg, const TargetPtr& target,
                   const std::optional<MirrorMap>& map, const Cloud& x0, const MetricHook& hook) {
  validate(cfg, *target, map);
  const Domain dom = target->domain();
  if (x0.rows() != cfg.particles || x0.cols() != dom.dim) {
    throw ConfigError("particles", "initial cloud shape does not match the configuration");
  }
  const RunClock clock;
  const bool mirrored = !is_projected(cfg.sampler);
  const bool parallel = cfg.execution == Execution::Parallel;

  std::optional<MirroredTarget> mt;
  Cloud x = x0;
  Cloud position;
  if (mirrored) {
    mt.emplace(target, *map);
    position.resize(x0.rows(), x0.cols());
    for (Eigen::Index i = 0; i < x0.rows(); ++i) {
      position.row(i) = map->primal_to_dual(x0.row(i).transpose()).transpose();
    }
  } else {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      x.row(i) = project_to_domain(dom, x.row(i).transpose()).transpose();
    }
    position = x;
  }

  std::optional<KtCoin> kt;
  std::optional<AdaptiveCoin> adaptive;
  std::optional<GradientStepper> stepper;
  switch (cfg.stepper.kind) {
    case StepperKind::CoinKT: kt.emplace(position, cfg.stepper.kt_scale); break;
    case StepperKind::CoinAdaptive: adaptive.emplace(position, cfg.stepper.guard); break;
    default: stepper.emplace(cfg.stepper, position.rows(), position.cols()); break;
  }
  Rng langevin = make_stream(cfg.seed, StreamTag::Langevin);
  const HermiteSpectralKernel spectral(std::max(cfg.spectral_order, 1));

  RunRecord rec;
  rec.initial_primal = x0;
  auto emit = [&](long t) {
    if (!hook) return;
    for (auto& [name, value] : hook(t, x, mirrored ? &position : nullptr)) {
      rec.rows.push_back({t, name, value, clock.elapsed_ms()});
    }
  };
  emit(0);

  auto bandwidth = [&]() {
    if (cfg.kernel.fixed_bandwidth) return *cfg.kernel.fixed_bandwidth;
    const bool dual = mirrored && cfg.kernel.median_space == BandwidthSpace::Dual;
    return median_bandwidth(dual ? position : x);
  };
  auto direction = [&](double h) -> Cloud {
    const KernelFamily fam = cfg.kernel.family;
    switch (cfg.sampler) {
      case SamplerKind::MSVGD:
      case SamplerKind::CoinMSVGD:
        return parallel ? parallel::msvgd_direction(position, *mt, fam, h)
                        : serial::msvgd_direction(position, *mt, fam, h);
      case SamplerKind::MKSDD:
      case SamplerKind::CoinMKSDD:
        return parallel ? parallel::mksdd_direction(position, *mt, fam, h)
                        : serial::mksdd_direction(position, *mt, fam, h);
      case SamplerKind::MLAWGD:
      case SamplerKind::CoinMLAWGD:
        return parallel ? parallel::mlawgd_direction(position, spectral)
                        : serial::mlawgd_direction(position, spectral);
      case SamplerKind::SVGDProjected:
      case SamplerKind::CoinSVGDProjected:
        return parallel ? parallel::svgd_direction(x, *target, fam, h)
                        : serial::svgd_direction(x, *target, fam, h);
      case SamplerKind::MLA:
        break;
    }
    throw std::logic_error("direction requested for a sampler without one");
  };

  auto finish = [&](long done) {
    rec.iterations = done;
    rec.final_primal = x;
    if (mirrored) rec.final_dual = position;
  };
  // Coin bettors advance internally even when the step is rejected; only
  // the accepted cloud is reported.
  for (long t = 1; t <= cfg.iterations; ++t) {
    try {
      Cloud next;
      Cloud next_x;
      try {
        if (cfg.sampler == SamplerKind::MLA) {
          next = mla_step(position, *mt, cfg.stepper.lr, langevin);
        } else {
          const double h = uses_kernel(cfg.sampler) ? bandwidth() : 0.0;
          const Cloud c = direction(h);
          if (!c.allFinite()) throw NumericalFailure("non-finite update direction", t);
          if (kt) {
            next = kt->step(c);
          } else if (adaptive) {
            next = adaptive->step(c);
          } else {
            next = position;
            stepper->apply(next, c);
          }
        }
        if (!next.allFinite()) throw NumericalFailure("non-finite particle position", t);
        if (mirrored) {
          next_x = dual_to_primal_rows(*map, next);
          for (Eigen::Index i = 0; i < next_x.rows(); ++i) {
            if (!dom.contains_open(next_x.row(i).transpose())) {
              throw NumericalFailure("particle left the open domain", t);
            }
          }
        } else {
          next_x.resize(next.rows(), next.cols());
          for (Eigen::Index i = 0; i < next.rows(); ++i) {
            next_x.row(i) = project_to_domain(dom, next.row(i).transpose()).transpose();
          }
          // Gradient steppers continue from the projected point; coin
          // bettors keep their own state and only the particle is projected.
          if (stepper) next = next_x;
        }
      } catch (const DomainViolation& e) {
        throw NumericalFailure(e.what(), t);
      } catch (const DegenerateCloud& e) {
        throw NumericalFailure(e.what(), t);
      }
      position = std::move(next);
      x = std::move(next_x);
    } catch (const NumericalFailure& e) {
      finish(t - 1);
      throw RunAborted(e, std::move(rec));
    }
    if (t % cfg.metric_every == 0 || t == cfg.iterations) emit(t);
  }
  finish(cfg.iterations);
  return rec;
}

}  // namespace mirrorcoin
