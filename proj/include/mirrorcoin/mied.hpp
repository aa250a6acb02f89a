#pragma once

#include "mirrorcoin/samplers.hpp"

namespace mirrorcoin {

enum class MollifierFamily { Riesz, Gaussian, Laplace };

/// Unnormalised mollifiers of width eps:
///   Riesz     (|r|^2 + eps^2)^(-s/2)
///   Gaussian  exp(-|r|^2 / (2 eps^2))
///   Laplace   exp(-|r| / eps)
struct Mollifier {
  MollifierFamily family = MollifierFamily::Riesz;
  double eps = 1e-8;
  double s = 0.0;  // Riesz exponent

  double log_value(VecRef r) const;
  /// Gradient of log_value in r. Zero at r = 0 for every family.
  Vec grad_log(VecRef r) const;
};

/// The Riesz mollifier with s = d + 1e-4 for dimension d.
Mollifier riesz_for_dim(int dim, double eps = 1e-8);

/// Smooth bijection from R^d onto the target domain (or the identity).
struct Reparam {
  enum class Kind { TanhBox, Identity };
  Kind kind = Kind::Identity;
  double lo = -1.0;
  double hi = 1.0;

  static Reparam tanh_box(double lo, double hi) { return {Kind::TanhBox, lo, hi}; }
  static Reparam identity() { return {Kind::Identity, 0.0, 0.0}; }

  /// Row-wise forward map. Tanh images are clamped strictly inside (lo, hi).
  Cloud forward(const Cloud& w) const;
  /// Diagonal Jacobian entries dx/dw, row-wise.
  Cloud derivative(const Cloud& w) const;
  Cloud inverse(const Cloud& x) const;
};

/// log[(1/N^2) sum_ij phi(x_i - x_j) (pi(x_i) pi(x_j))^(-1/2)] at x = f(w),
/// accumulated with a max-shifted log-sum-exp; diagonal terms included.
double mie_log_energy(const Cloud& w, const Reparam& reparam, const Mollifier& mollifier,
                      const ConstrainedTarget& target, Execution exec = Execution::Parallel);

/// Gradient of mie_log_energy in the unconstrained coordinates w.
Cloud mie_gradient(const Cloud& w, const Reparam& reparam, const Mollifier& mollifier,
                   const ConstrainedTarget& target, Execution exec = Execution::Parallel);

struct MiedConfig {
  Reparam reparam;
  Mollifier mollifier;
  StepperConfig stepper;
  InitSpec init{InitSpec::Kind::Uniform, -1.0, 1.0};
  int particles = 100;
  long iterations = 250;
  std::uint64_t seed = 0;
  int metric_every = 10;
  Execution execution = Execution::Parallel;
};

/// Throws ConfigError listing every problem with the configuration.
void validate_mied(const MiedConfig& cfg, const ConstrainedTarget& target);

/// Descends log E with FixedLR / RMSProp, or runs coin betting on the
/// outcomes -grad log E. Hooks receive the constrained particles; the trace
/// always carries a "log_energy" row at every hook iteration.
RunRecord run_mied(const MiedConfig& cfg, const TargetPtr& target, const MetricHook& hook = {});

}  // namespace mirrorcoin
