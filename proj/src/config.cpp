#include "mirrorcoin/config.hpp"

#include <charconv>
#include <set>

#include "mirrorcoin/io.hpp"

namespace mirrorcoin {

namespace {

bool is_lr_key(const std::string& key) {
  return key == "lr" || key == "stepper.lr" || key == "learning_rate" ||
         key == "stepper.learning_rate";
}

// Key lookup that records each violation and remembers which keys were read.
class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::optional<std::string> text(const std::string& key) {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
  }

  std::string text_or(const std::string& key, const std::string& fallback) {
    return text(key).value_or(fallback);
  }

  double number(const std::string& key, double fallback) {
    const auto v = text(key);
    if (!v) return fallback;
    double out = 0.0;
    if (!parse_double(*v, out)) fail(key, "expected a finite number, got '" + *v + "'");
    return out;
  }

  long integer(const std::string& key, long fallback) {
    const auto v = text(key);
    if (!v) return fallback;
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) {
      fail(key, "expected an integer, got '" + *v + "'");
      return fallback;
    }
    return out;
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const auto v = text(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
      fail(key, "expected an unsigned 64-bit integer, got '" + *v + "'");
      return fallback;
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const auto v = text(key);
    if (!v) return out;
    for (const auto& item : io::split(*v, ',')) {
      double x = 0.0;
      if (!parse_double(io::trim(item), x)) {
        fail(key, "expected a comma-separated list of numbers");
        return {};
      }
      out.push_back(x);
    }
    return out;
  }

  void fail(const std::string& key, const std::string& reason) { errs_.push_back({key, reason}); }

  void report_unknown() {
    for (const auto& [key, value] : kv_) {
      if (!used_.count(key) && !is_lr_key(key)) fail(key, "unknown key");
    }
  }

  std::vector<ConfigViolation>& errors() { return errs_; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  static bool parse_double(const std::string& s, double& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return !s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
  std::vector<ConfigViolation> errs_;
};

std::map<std::string, std::string> tokenize(const std::string& text,
                                            std::vector<ConfigViolation>& errs) {
  std::map<std::string, std::string> kv;
  int line_no = 0;
  for (std::string line : io::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = io::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos) {
      errs.push_back({where, "expected 'key = value'"});
      continue;
    }
    const std::string key = io::trim(line.substr(0, eq));
    const std::string value = io::trim(line.substr(eq + 1));
    if (key.empty()) {
      errs.push_back({where, "empty key"});
    } else if (value.empty()) {
      errs.push_back({key, "empty value"});
    } else if (!kv.emplace(key, value).second) {
      errs.push_back({key, "duplicate key"});
    }
  }
  return kv;
}

Vec pad_to(const std::vector<double>& values, int size, double fill) {
  Vec out = Vec::Constant(size, fill);
  for (int i = 0; i < size && i < static_cast<int>(values.size()); ++i) out[i] = values[i];
  return out;
}

void read_target(Reader& r, TargetSpec& t) {
  t.kind = r.text_or("target", t.kind);
  t.dim = static_cast<int>(r.integer("target.dim", t.dim));
  t.data_seed = r.unsigned64("target.data_seed", 0);
  if (t.kind == "sparse_dirichlet") {
    if (t.dim < 1) r.fail("target.dim", "must be >= 1");
    const int full = std::max(t.dim, 1) + 1;
    const auto alpha = r.numbers("target.alpha");
    if (alpha.size() > 1 && alpha.size() != static_cast<std::size_t>(full)) {
      r.fail("target.alpha", "give one value or d+1 values");
    }
    t.alpha = alpha.size() == 1 ? Vec::Constant(full, alpha[0]) : pad_to(alpha, full, 0.1);
    const auto counts = r.numbers("target.counts");
    if (counts.size() > static_cast<std::size_t>(full)) r.fail("target.counts", "more than d+1 entries");
    t.counts = pad_to(counts, full, 0.0);
  } else if (t.kind == "quadratic") {
    t.sigma = r.number("target.sigma", t.sigma);
  } else if (t.kind == "uniform_box") {
    t.lo = r.number("target.lo", t.lo);
    t.hi = r.number("target.hi", t.hi);
  } else if (t.kind == "exponential") {
    t.rate = r.number("target.rate", t.rate);
  } else if (t.kind == "lognormal") {
    t.mu = r.number("target.mu", t.mu);
    t.sigma = r.number("target.sigma", t.sigma);
  } else if (t.kind == "selective_lasso") {
    t.lasso_n = static_cast<int>(r.integer("target.n", t.lasso_n));
    t.lasso_p = static_cast<int>(r.integer("target.p", t.lasso_p));
    t.lasso_rho = r.number("target.rho", t.lasso_rho);
    t.lasso_lambda = r.number("target.lambda", t.lasso_lambda);
    t.lasso_tau = r.number("target.tau", t.lasso_tau);
  } else {
    r.fail("target", "unknown target '" + t.kind + "'");
  }
}

std::optional<StepperKind> stepper_from_string(const std::string& s) {
  if (s == "fixed") return StepperKind::FixedLR;
  if (s == "rmsprop") return StepperKind::RMSProp;
  if (s == "coin_kt") return StepperKind::CoinKT;
  if (s == "coin_adaptive") return StepperKind::CoinAdaptive;
  return std::nullopt;
}

std::string default_init(const Domain& dom) {
  switch (dom.kind) {
    case DomainKind::Simplex: return "dirichlet:5";
    case DomainKind::Orthant: return "exponential:1";
    case DomainKind::Box: {
      const double q = 0.25 * (dom.hi - dom.lo);
      return "uniform:" + io::format_double(dom.lo + q) + ":" + io::format_double(dom.hi - q);
    }
  }
  return "dirichlet:5";
}

}  // namespace

TargetPtr build_target(const TargetSpec& t) {
  try {
    if (t.kind == "sparse_dirichlet") return std::make_shared<SparseDirichlet>(t.alpha, t.counts);
    if (t.kind == "quadratic") {
      if (t.dim < 1) throw ConfigError("target.dim", "must be >= 1");
      Rng rng = make_stream(t.data_seed, StreamTag::TargetData);
      return std::make_shared<QuadraticSimplex>(QuadraticSimplex::random_matrix(t.dim, rng), t.sigma);
    }
    if (t.kind == "uniform_box") return std::make_shared<UniformBox>(t.dim, t.lo, t.hi);
    if (t.kind == "exponential") return std::make_shared<ExponentialOrthant>(t.dim, t.rate);
    if (t.kind == "lognormal") return std::make_shared<LogNormalOrthant>(t.dim, t.mu, t.sigma);
    if (t.kind == "selective_lasso") {
      Rng rng = make_stream(t.data_seed, StreamTag::TargetData);
      return std::make_shared<SelectiveLasso>(SelectiveLasso::synthetic(
          t.lasso_n, t.lasso_p, t.lasso_rho, t.lasso_lambda, t.lasso_tau, rng));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Unsupported&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("target", e.what());
  }
  throw ConfigError("target", "unknown target '" + t.kind + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  std::vector<ConfigViolation> token_errs;
  Reader r(tokenize(text, token_errs));
  r.errors() = token_errs;
  ExperimentConfig cfg;
  cfg.entries = r.entries();

  read_target(r, cfg.target);
  TargetPtr target;
  if (r.errors().empty()) {
    try {
      target = build_target(cfg.target);
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) r.fail(v.key, v.reason);
    } catch (const Unsupported& e) {
      r.fail("target", e.what());
    }
  }
  // Placeholder domain when the target failed to build; errors are reported below.
  const Domain domain_value = target ? target->domain() : Domain{DomainKind::Simplex, 1};
  const Domain* dom = target ? &domain_value : nullptr;

  // Sampler and stepper.
  const auto sampler = r.text("sampler");
  if (!sampler) r.fail("sampler", "required");
  cfg.sampler = sampler.value_or("");
  cfg.uses_mied = cfg.sampler == "mied" || cfg.sampler == "coin_mied";
  std::optional<SamplerKind> kind;
  if (sampler && !cfg.uses_mied) {
    kind = sampler_from_string(cfg.sampler);
    if (!kind) r.fail("sampler", "unknown sampler '" + cfg.sampler + "'");
  }
  const bool coin = cfg.sampler == "coin_mied" || (kind && mirrorcoin::is_coin(*kind));

  std::vector<std::string> lr_keys;
  for (const auto& [key, value] : r.entries()) {
    if (is_lr_key(key)) lr_keys.push_back(key);
  }
  StepperConfig stepper;
  const std::string default_stepper =
      coin ? "coin_adaptive" : (kind == SamplerKind::MLA ? "fixed" : "rmsprop");
  const std::string stepper_name = r.text_or("stepper", default_stepper);
  if (const auto sk = stepper_from_string(stepper_name)) {
    stepper.kind = *sk;
  } else {
    r.fail("stepper", "unknown stepper '" + stepper_name + "'");
  }
  const bool coin_stepper =
      stepper.kind == StepperKind::CoinKT || stepper.kind == StepperKind::CoinAdaptive;
  if (coin || coin_stepper) {
    for (const auto& key : lr_keys) r.fail(key, "learning-rate key forbidden for coin steppers");
  } else if (lr_keys.size() > 1) {
    r.fail("stepper.lr", "learning rate given more than once");
  } else if (lr_keys.empty()) {
    if (sampler) r.fail("stepper.lr", "required for learning-rate steppers");
  } else {
    stepper.lr = r.number(lr_keys.front(), 0.0);
  }
  stepper.decay = r.number("stepper.decay", stepper.decay);
  stepper.eps = r.number("stepper.eps", stepper.eps);
  stepper.kt_scale = r.number("stepper.kt_scale", stepper.kt_scale);
  const std::string guard = r.text_or("stepper.guard", "none");
  if (guard == "none") {
    stepper.guard = CoinGuard::None;
  } else if (guard == "max100l") {
    stepper.guard = CoinGuard::Max100L;
  } else {
    r.fail("stepper.guard", "expected none or max100l");
  }

  // Sizes, seed, init.
  const long particles = r.integer("particles", 50);
  const long iterations = r.integer("iterations", 500);
  const std::uint64_t seed = r.unsigned64("seed", 0);
  const long every = r.integer("metrics.every", 10);
  if (particles < 1) r.fail("particles", "must be >= 1");
  if (iterations < 0) r.fail("iterations", "must be >= 0");
  if (every < 1) r.fail("metrics.every", "must be >= 1");
  InitSpec init;
  const auto init_text = r.text("init");
  if (init_text || dom) {
    try {
      init = parse_init_spec(init_text ? *init_text : default_init(*dom));
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) r.fail(v.key, v.reason);
    }
  }
  Execution exec = Execution::Parallel;
  const std::string exec_name = r.text_or("execution", "parallel");
  if (exec_name == "serial") {
    exec = Execution::Serial;
  } else if (exec_name != "parallel") {
    r.fail("execution", "expected parallel or serial");
  }

  // Kernel.
  const bool spectral = kind == SamplerKind::MLAWGD || kind == SamplerKind::CoinMLAWGD;
  const std::string kernel_name = r.text_or("kernel", spectral ? "hermite" : "imq");
  KernelConfig kernel;
  if (kernel_name == "imq") {
    kernel.family = KernelFamily::IMQ;
  } else if (kernel_name == "rbf") {
    kernel.family = KernelFamily::RBF;
  } else if (kernel_name != "hermite") {
    r.fail("kernel", "unknown kernel '" + kernel_name + "'");
  }
  if (spectral && kernel_name != "hermite") r.fail("kernel", "mlawgd samplers need the hermite spectral kernel");
  if (!spectral && kernel_name == "hermite") r.fail("kernel", "the hermite kernel is only used by mlawgd samplers");
  const std::string bw = r.text_or("kernel.bandwidth", "median");
  if (bw != "median") {
    double h = 0.0;
    if (!Reader::parse_double(bw, h) || !(h > 0.0)) {
      r.fail("kernel.bandwidth", "expected 'median' or a positive number");
    } else {
      kernel.fixed_bandwidth = h;
    }
  }
  const std::string space = r.text_or("kernel.median_space", "dual");
  if (space == "primal") {
    kernel.median_space = BandwidthSpace::Primal;
  } else if (space != "dual") {
    r.fail("kernel.median_space", "expected dual or primal");
  }
  const long order = r.integer("kernel.order", 30);

  // Map.
  const std::string default_map = !dom ? "none"
                                  : dom->kind == DomainKind::Simplex ? "entropic"
                                  : dom->kind == DomainKind::Orthant ? "orthant"
                                                                     : "none";
  const std::string map_name = r.text_or("map", default_map);
  if (map_name == "entropic") {
    cfg.map = MapKind::EntropicSimplex;
  } else if (map_name == "orthant") {
    cfg.map = MapKind::PositiveOrthant;
  } else if (map_name != "none") {
    r.fail("map", "expected entropic, orthant or none");
  }

  // Interaction energy.
  const std::string moll = r.text_or("mollifier", "riesz");
  Mollifier mollifier;
  if (moll == "riesz") {
    mollifier.family = MollifierFamily::Riesz;
  } else if (moll == "gaussian") {
    mollifier.family = MollifierFamily::Gaussian;
  } else if (moll == "laplace") {
    mollifier.family = MollifierFamily::Laplace;
  } else {
    r.fail("mollifier", "expected riesz, gaussian or laplace");
  }
  mollifier.eps = r.number("mollifier.eps", 1e-8);
  mollifier.s = r.number("mollifier.s", (dom ? dom->dim : 1) + 1e-4);
  const std::string reparam = r.text_or("reparam", dom && dom->kind == DomainKind::Box ? "tanh" : "identity");
  Reparam rp;
  if (reparam == "tanh") {
    rp = dom ? Reparam::tanh_box(dom->lo, dom->hi) : Reparam::tanh_box(-1.0, 1.0);
  } else if (reparam != "identity") {
    r.fail("reparam", "expected tanh or identity");
  }

  // Ground truth and metrics.
  cfg.ground_truth = r.text_or("ground_truth", "builtin");
  cfg.ground_truth_n = static_cast<int>(r.integer("ground_truth.n", 1000));
  cfg.ground_truth_seed = r.unsigned64("ground_truth.seed", 0);
  if (cfg.ground_truth_n < 1) r.fail("ground_truth.n", "must be >= 1");
  const auto metric_list = r.text("metrics");
  if (metric_list) {
    for (const auto& m : io::split(*metric_list, ',')) {
      const std::string name = io::trim(m);
      if (name != "energy_distance" && name != "ksd" && name != "mean") {
        r.fail("metrics", "unknown metric '" + name + "'");
      }
      cfg.metrics.push_back(name);
    }
  }
  cfg.sweep_metric = r.text_or("sweep.metric", "energy_distance");
  if (cfg.sweep_metric != "energy_distance" && cfg.sweep_metric != "ksd") {
    r.fail("sweep.metric", "expected energy_distance or ksd");
  }
  cfg.output = r.text_or("output", "");

  r.report_unknown();

  // Assemble and cross-validate.
  if (cfg.uses_mied) {
    MiedConfig& m = cfg.mied;
    m.reparam = rp;
    m.mollifier = mollifier;
    m.stepper = stepper;
    m.init = init;
    m.particles = static_cast<int>(particles);
    m.iterations = iterations;
    m.seed = seed;
    m.metric_every = static_cast<int>(every);
    m.execution = exec;
    if (cfg.sampler == "coin_mied" && !coin_stepper) r.fail("stepper", "coin_mied needs a coin stepper");
    if (cfg.sampler == "mied" && coin_stepper) r.fail("stepper", "mied needs fixed or rmsprop; use coin_mied");
    if (target && r.errors().empty()) {
      try {
        validate_mied(m, *target);
      } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) r.fail(v.key, v.reason);
      }
    }
    for (const auto& name : cfg.metrics) {
      if (name == "ksd") r.fail("metrics", "ksd needs a mirrored sampler");
    }
  } else {
    RunConfig& rc = cfg.run;
    if (kind) rc.sampler = *kind;
    rc.kernel = kernel;
    rc.stepper = stepper;
    rc.init = init;
    rc.particles = static_cast<int>(particles);
    rc.iterations = iterations;
    rc.seed = seed;
    rc.metric_every = static_cast<int>(every);
    rc.spectral_order = static_cast<int>(order);
    rc.execution = exec;
    if (target && kind && r.errors().empty()) {
      std::optional<MirrorMap> map;
      if (cfg.map && !is_projected(*kind)) {
        map = *cfg.map == MapKind::EntropicSimplex ? MirrorMap::entropic_simplex(target->dim())
                                                   : MirrorMap::positive_orthant(target->dim());
      }
      try {
        validate(rc, *target, map);
      } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) r.fail(v.key, v.reason);
      }
    }
    for (const auto& name : cfg.metrics) {
      if (name == "ksd" && kind && is_projected(*kind)) r.fail("metrics", "ksd needs a mirrored sampler");
    }
  }
  if (!r.errors().empty()) throw ConfigError(std::move(r.errors()));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const std::exception& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

void ExperimentConfig::set_seed(std::uint64_t s) {
  run.seed = s;
  mied.seed = s;
  entries["seed"] = std::to_string(s);
}

bool ExperimentConfig::is_coin() const {
  if (uses_mied) return sampler == "coin_mied";
  return mirrorcoin::is_coin(run.sampler);
}

ExperimentConfig coin_counterpart(const ExperimentConfig& baseline) {
  if (baseline.is_coin()) throw ConfigError("sampler", "sweeps need a learning-rate baseline sampler");
  ExperimentConfig c = baseline;
  std::string name;
  if (baseline.uses_mied) {
    name = "coin_mied";
  } else {
    switch (baseline.run.sampler) {
      case SamplerKind::MSVGD: name = "coin_msvgd"; break;
      case SamplerKind::MKSDD: name = "coin_mksdd"; break;
      case SamplerKind::MLAWGD: name = "coin_mlawgd"; break;
      case SamplerKind::SVGDProjected: name = "coin_svgd_projected"; break;
      default: throw ConfigError("sampler", "no coin counterpart for " + baseline.sampler);
    }
    c.run.sampler = *sampler_from_string(name);
  }
  c.sampler = name;
  StepperConfig coin;
  coin.kind = StepperKind::CoinAdaptive;
  c.run.stepper = coin;
  c.mied.stepper = coin;
  for (auto it = c.entries.begin(); it != c.entries.end();) {
    it = is_lr_key(it->first) || it->first.rfind("stepper", 0) == 0 ? c.entries.erase(it) : std::next(it);
  }
  c.entries["sampler"] = name;
  c.entries["stepper"] = "coin_adaptive";
  return c;
}

ExperimentConfig with_learning_rate(const ExperimentConfig& cfg, double lr) {
  if (cfg.is_coin()) throw ConfigError("stepper.lr", "learning-rate key forbidden for coin steppers");
  if (!(lr > 0.0)) throw ConfigError("stepper.lr", "must be > 0");
  ExperimentConfig c = cfg;
  c.run.stepper.lr = lr;
  c.mied.stepper.lr = lr;
  for (auto it = c.entries.begin(); it != c.entries.end();) {
    it = is_lr_key(it->first) ? c.entries.erase(it) : std::next(it);
  }
  c.entries["stepper.lr"] = io::format_double(lr);
  return c;
}

}  // namespace mirrorcoin
