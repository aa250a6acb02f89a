#include "mirrorcoin/mied.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace mirrorcoin {

double Mollifier::log_value(VecRef r) const {
  const double r2 = r.squaredNorm();
  switch (family) {
    case MollifierFamily::Riesz: return -0.5 * s * std::log(r2 + eps * eps);
    case MollifierFamily::Gaussian: return -r2 / (2.0 * eps * eps);
    case MollifierFamily::Laplace: return -std::sqrt(r2) / eps;
  }
  return 0.0;
}

Vec Mollifier::grad_log(VecRef r) const {
  const double r2 = r.squaredNorm();
  switch (family) {
    case MollifierFamily::Riesz: return r * (-s / (r2 + eps * eps));
    case MollifierFamily::Gaussian: return r * (-1.0 / (eps * eps));
    case MollifierFamily::Laplace: {
      if (r2 == 0.0) return Vec::Zero(r.size());
      return r * (-1.0 / (eps * std::sqrt(r2)));
    }
  }
  return Vec::Zero(r.size());
}

Mollifier riesz_for_dim(int dim, double eps) {
  return {MollifierFamily::Riesz, eps, static_cast<double>(dim) + 1e-4};
}

Cloud Reparam::forward(const Cloud& w) const {
  if (kind == Kind::Identity) return w;
  const double c = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double top = std::nextafter(hi, lo);
  const double bottom = std::nextafter(lo, hi);
  return w.unaryExpr([=](double v) { return std::clamp(c + half * std::tanh(v), bottom, top); });
}

Cloud Reparam::derivative(const Cloud& w) const {
  if (kind == Kind::Identity) return Cloud::Ones(w.rows(), w.cols());
  const double half = 0.5 * (hi - lo);
  return w.unaryExpr([=](double v) {
    const double t = std::tanh(v);
    return half * (1.0 - t * t);
  });
}

Cloud Reparam::inverse(const Cloud& x) const {
  if (kind == Kind::Identity) return x;
  const double c = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double a = lo;
  const double b = hi;
  return x.unaryExpr([=](double v) {
    if (!(v > a && v < b)) throw DomainViolation("tanh reparameterisation needs points inside the box");
    return std::atanh((v - c) / half);
  });
}

namespace {

using Index = Eigen::Index;

struct PairTerms {
  Cloud x;
  Vec log_pi;
  Cloud score;
};

PairTerms evaluate_points(const Cloud& w, const Reparam& reparam, const ConstrainedTarget& target) {
  if (w.rows() < 1) throw std::invalid_argument("mie: empty particle cloud");
  PairTerms p;
  p.x = reparam.forward(w);
  p.log_pi.resize(w.rows());
  p.score.resize(w.rows(), w.cols());
  for (Index i = 0; i < w.rows(); ++i) {
    const Vec xi = p.x.row(i).transpose();
    p.log_pi[i] = target.ambient_log_density(target.to_ambient(xi));
    p.score.row(i) = target.primal_score_unchecked(xi).transpose();
  }
  if (!p.log_pi.allFinite()) throw DomainViolation("mie: target log density not finite at a particle");
  return p;
}

double pair_log_term(const PairTerms& p, const Mollifier& m, Index i, Index j) {
  return m.log_value((p.x.row(i) - p.x.row(j)).transpose()) - 0.5 * (p.log_pi[i] + p.log_pi[j]);
}

// Pair log terms; rows filled in parallel when requested.
Mat pair_log_terms(const PairTerms& p, const Mollifier& m, Execution exec) {
  const Index n = p.x.rows();
  Mat l(n, n);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) l(i, j) = pair_log_term(p, m, i, j);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) l(i, j) = pair_log_term(p, m, i, j);
    }
  }
  return l;
}

// log sum exp over all entries: global max, row partial sums, then rows in order.
std::pair<double, double> shifted_sum(const Mat& l, Execution exec) {
  const double m = l.maxCoeff();
  const Index n = l.rows();
  Vec rows(n);
  auto row_sum = [&](Index i) {
    double s = 0.0;
    for (Index j = 0; j < n; ++j) s += std::exp(l(i, j) - m);
    rows[i] = s;
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) row_sum(i);
  } else {
    for (Index i = 0; i < n; ++i) row_sum(i);
  }
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += rows[i];
  return {m, total};
}

double serial_log_energy(const PairTerms& p, const Mollifier& m) {
  // One running log-sum-exp over every ordered pair.
  const Index n = p.x.rows();
  double acc = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double v = pair_log_term(p, m, i, j);
      const double hi = std::max(acc, v);
      acc = hi + std::log(std::exp(acc - hi) + std::exp(v - hi));
    }
  }
  return acc - 2.0 * std::log(static_cast<double>(n));
}

}  // namespace

double mie_log_energy(const Cloud& w, const Reparam& reparam, const Mollifier& mollifier,
                      const ConstrainedTarget& target, Execution exec) {
  const PairTerms p = evaluate_points(w, reparam, target);
  if (exec == Execution::Serial) return serial_log_energy(p, mollifier);
  const Mat l = pair_log_terms(p, mollifier, exec);
  const auto [m, total] = shifted_sum(l, exec);
  return m + std::log(total) - 2.0 * std::log(static_cast<double>(w.rows()));
}

Cloud mie_gradient(const Cloud& w, const Reparam& reparam, const Mollifier& mollifier,
                   const ConstrainedTarget& target, Execution exec) {
  const PairTerms p = evaluate_points(w, reparam, target);
  const Index n = w.rows();
  const Index d = w.cols();
  const Mat l = pair_log_terms(p, mollifier, exec);
  const auto [m, total] = shifted_sum(l, exec);
  Cloud grad_x = Cloud::Zero(n, d);
  if (exec == Execution::Serial) {
    // Both the (i, j) and (j, i) terms depend on x_i; accumulate them apart.
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double weight = std::exp(l(i, j) - m) / total;
        const Vec g = mollifier.grad_log((p.x.row(i) - p.x.row(j)).transpose());
        grad_x.row(i) += weight * (g - 0.5 * p.score.row(i).transpose()).transpose();
        grad_x.row(j) += weight * (-g - 0.5 * p.score.row(j).transpose()).transpose();
      }
    }
  } else {
    // The pair weights are symmetric and grad log phi is odd, so row i
    // collects 2 sum_j P_ij (grad log phi(x_i - x_j) - s_i / 2).
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      Vec acc = Vec::Zero(d);
      for (Index j = 0; j < n; ++j) {
        const double weight = std::exp(l(i, j) - m) / total;
        acc += weight * (mollifier.grad_log((p.x.row(i) - p.x.row(j)).transpose()) -
                         0.5 * p.score.row(i).transpose());
      }
      grad_x.row(i) = 2.0 * acc.transpose();
    }
  }
  return grad_x.cwiseProduct(reparam.derivative(w));
}

void validate_mied(const MiedConfig& cfg, const ConstrainedTarget& target) {
  std::vector<ConfigViolation> errs;
  const StepperKind sk = cfg.stepper.kind;
  const bool coin = sk == StepperKind::CoinKT || sk == StepperKind::CoinAdaptive;
  if (cfg.particles < 1) errs.push_back({"particles", "must be >= 1"});
  if (cfg.iterations < 0) errs.push_back({"iterations", "must be >= 0"});
  if (cfg.metric_every < 1) errs.push_back({"metrics.every", "must be >= 1"});
  if (coin && cfg.stepper.lr != 0.0) {
    errs.push_back({"stepper.lr", "learning-rate key forbidden for coin steppers"});
  }
  if (!coin && !(cfg.stepper.lr > 0.0)) errs.push_back({"stepper.lr", "must be > 0"});
  if (!(cfg.mollifier.eps > 0.0)) errs.push_back({"mollifier.eps", "must be > 0"});
  const Domain dom = target.domain();
  if (cfg.reparam.kind == Reparam::Kind::TanhBox &&
      (dom.kind != DomainKind::Box || dom.lo != cfg.reparam.lo || dom.hi != cfg.reparam.hi)) {
    errs.push_back({"reparam", "tanh reparameterisation must match the box target"});
  }
  if (cfg.reparam.kind == Reparam::Kind::Identity && dom.kind != DomainKind::Box) {
    errs.push_back({"reparam", "identity reparameterisation leaves constrained targets unconstrained"});
  }
  if (!errs.empty()) throw ConfigError(std::move(errs));
}

RunRecord run_mied(const MiedConfig& cfg, const TargetPtr& target, const MetricHook& hook) {
  validate_mied(cfg, *target);
  const Domain dom = target->domain();
  const StepperKind sk = cfg.stepper.kind;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  Rng init_rng = make_stream(cfg.seed, StreamTag::Init);
  const Cloud x0 = draw_initial(cfg.init, dom, cfg.particles, init_rng);
  Cloud w = cfg.reparam.inverse(x0);
  // forward(inverse(x0)) can differ from x0 in the last bit; report x0 itself
  // until the first step moves the particles.
  Cloud x = x0;

  std::optional<KtCoin> kt;
  std::optional<AdaptiveCoin> adaptive;
  std::optional<GradientStepper> stepper;
  switch (sk) {
    case StepperKind::CoinKT: kt.emplace(w, cfg.stepper.kt_scale); break;
    case StepperKind::CoinAdaptive: adaptive.emplace(w, cfg.stepper.guard); break;
    default: stepper.emplace(cfg.stepper, w.rows(), w.cols()); break;
  }

  RunRecord rec;
  rec.initial_primal = x0;
  auto emit = [&](long t) {
    const double log_e = mie_log_energy(w, cfg.reparam, cfg.mollifier, *target, cfg.execution);
    rec.rows.push_back({t, "log_energy", log_e, elapsed()});
    if (!hook) return;
    for (auto& [name, value] : hook(t, x, nullptr)) rec.rows.push_back({t, name, value, elapsed()});
  };
  emit(0);
  for (long t = 1; t <= cfg.iterations; ++t) {
    try {
      Cloud next;
      try {
        const Cloud c = -mie_gradient(w, cfg.reparam, cfg.mollifier, *target, cfg.execution);
        if (!c.allFinite()) throw NumericalFailure("non-finite interaction-energy gradient", t);
        if (kt) {
          next = kt->step(c);
        } else if (adaptive) {
          next = adaptive->step(c);
        } else {
          next = w;
          stepper->apply(next, c);
        }
        if (!next.allFinite()) throw NumericalFailure("non-finite particle position", t);
      } catch (const DomainViolation& e) {
        throw NumericalFailure(e.what(), t);
      }
      w = std::move(next);
      x = cfg.reparam.forward(w);
    } catch (const NumericalFailure& e) {
      rec.iterations = t - 1;
      rec.final_primal = x;
      throw RunAborted(e, std::move(rec));
    }
    if (t % cfg.metric_every == 0 || t == cfg.iterations) emit(t);
  }
  rec.iterations = cfg.iterations;
  rec.final_primal = x;
  return rec;
}

}  // namespace mirrorcoin
