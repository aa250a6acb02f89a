#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mirrorcoin/geometry.hpp"
#include "mirrorcoin/rng.hpp"
#include "mirrorcoin/types.hpp"

namespace mirrorcoin {

enum class DomainKind { Simplex, Orthant, Box };

std::string to_string(DomainKind kind);

/// Domain of a target: the open simplex / orthant in d free coordinates, or
/// the open box (lo, hi)^d.
struct Domain {
  DomainKind kind;
  int dim;
  double lo = 0.0;
  double hi = 1.0;

  /// Strict interior test with the kInteriorFloor margin.
  bool contains(VecRef x) const;
  /// Strictly positive coordinates (and slack on the simplex); no floor.
  bool contains_open(VecRef x) const;
};

/// Ground-truth draw plus a note on how it was produced.
struct GroundTruth {
  Cloud samples;
  std::string method;
};

/// Unnormalised constrained target pi = exp(-V).
///
/// Simplex targets are written in terms of all d+1 barycentric coordinates
/// ("ambient" coordinates) so that the mirrored score can be formed without
/// cancellation when the implicit coordinate is tiny. For the orthant and
/// the box the ambient and free coordinates coincide.
class ConstrainedTarget {
 public:
  virtual ~ConstrainedTarget() = default;

  virtual std::string name() const = 0;
  virtual Domain domain() const = 0;
  int dim() const { return domain().dim; }

  virtual double ambient_log_density(VecRef ambient) const = 0;
  virtual Vec ambient_score(VecRef ambient) const = 0;
  virtual Mat ambient_score_jacobian(VecRef ambient) const = 0;

  /// Free-coordinate log density; throws DomainViolation outside the domain.
  double log_density(VecRef x) const;
  /// grad log pi in the d free coordinates.
  Vec primal_score(VecRef x) const;
  /// Same without the domain check, for points sitting on the floor.
  Vec primal_score_unchecked(VecRef x) const;

  /// i.i.d. (or exact rejection) samples; throws Unsupported where no
  /// built-in oracle exists.
  virtual GroundTruth sample_ground_truth(int n, Rng& rng) const;

  Vec to_ambient(VecRef x) const;
};

using TargetPtr = std::shared_ptr<const ConstrainedTarget>;

class SparseDirichlet final : public ConstrainedTarget {
 public:
  /// alpha and counts have d+1 entries each.
  SparseDirichlet(Vec alpha, Vec counts);

  std::string name() const override { return "sparse_dirichlet"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;
  GroundTruth sample_ground_truth(int n, Rng& rng) const override;

  /// Posterior concentration n + alpha.
  const Vec& concentration() const { return conc_; }
  Vec posterior_mean() const;

 private:
  Vec conc_;
};

class QuadraticSimplex final : public ConstrainedTarget {
 public:
  QuadraticSimplex(Mat a, double sigma);

  /// A = B^T B / max|B^T B|_ij with B i.i.d. Unif[-1, 1] (d x d).
  static Mat random_matrix(int dim, Rng& rng);

  std::string name() const override { return "quadratic"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;
  /// Exact rejection sampling under a piecewise-constant envelope on a
  /// regular grid of cubes; d <= 3 only.
  GroundTruth sample_ground_truth(int n, Rng& rng) const override;

  const Mat& matrix() const { return a_; }
  double sigma() const { return sigma_; }

  static constexpr int kGridResolution = 64;

 private:
  Mat a_;
  double sigma_;
};

class UniformBox final : public ConstrainedTarget {
 public:
  UniformBox(int dim, double lo, double hi);

  std::string name() const override { return "uniform_box"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;
  GroundTruth sample_ground_truth(int n, Rng& rng) const override;

 private:
  int dim_;
  double lo_, hi_;
};

/// Product of Exp(rate) marginals on the orthant.
class ExponentialOrthant final : public ConstrainedTarget {
 public:
  ExponentialOrthant(int dim, double rate);

  std::string name() const override { return "exponential"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;
  GroundTruth sample_ground_truth(int n, Rng& rng) const override;

 private:
  int dim_;
  double rate_;
};

/// Product of LogNormal(mu, sigma) marginals; under the orthant map its dual
/// target is N(mu, sigma^2) per coordinate.
class LogNormalOrthant final : public ConstrainedTarget {
 public:
  LogNormalOrthant(int dim, double mu, double sigma);

  std::string name() const override { return "lognormal"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;
  GroundTruth sample_ground_truth(int n, Rng& rng) const override;

 private:
  int dim_;
  double mu_, sigma_;
};

/// Data and selection event of a randomised Lasso fit.
struct LassoSelection {
  Mat design;                // n x p
  Vec response;              // n
  double lambda = 1.0;       // l1 penalty
  double ridge = 0.0;        // epsilon
  double tau = 1.0;          // Gaussian randomisation std
  std::vector<int> active;   // E, ascending
  std::vector<int> signs;    // z_E in {-1, +1}
};

/// Selective density of |beta_E| on the orthant with the inactive
/// subgradient integrated out in closed form:
///   log g(b) = -|omega_E(b)|^2 / (2 tau^2)
///              + sum_{j not in E} log[Phi((lam - u_j)/tau) - Phi((-lam - u_j)/tau)]
/// where beta_E = z_E * b,
///   omega_E = ridge beta_E - X_E^T (y - X_E beta_E) + lam z_E,
///   u_j = X_j^T (y - X_E beta_E).
class SelectiveLasso final : public ConstrainedTarget {
 public:
  explicit SelectiveLasso(LassoSelection sel);

  /// Synthetic equicorrelated design (unit-norm columns), y ~ N(0, I),
  /// ridge = sd(y)^2 / sqrt(n); solves the randomised Lasso to obtain E.
  static LassoSelection synthetic(int n, int p, double rho, double lambda, double tau,
                                  Rng& rng);

  std::string name() const override { return "selective_lasso"; }
  Domain domain() const override;
  double ambient_log_density(VecRef ambient) const override;
  Vec ambient_score(VecRef ambient) const override;
  Mat ambient_score_jacobian(VecRef ambient) const override;

  const LassoSelection& selection() const { return sel_; }

 private:
  struct Terms {
    Vec omega_e;
    Vec u_inactive;
  };
  Terms terms(VecRef b) const;

  LassoSelection sel_;
  Mat x_active_;      // X_E
  Mat x_inactive_;    // X_{-E}
  Mat gram_ridge_;    // ridge I + X_E^T X_E
  Mat cross_;         // X_E^T X_{-E}
  Vec z_;
};

/// Numerically stable log(Phi(a) - Phi(c)) for a > c.
double log_normal_cdf_diff(double a, double c);
double log_normal_cdf(double x);

/// Target pi on a domain paired with a mirror map; dual potential
/// W(y) = V(x) + log det hess phi(x) at x = grad phi*(y).
class MirroredTarget {
 public:
  MirroredTarget(TargetPtr target, MirrorMap map);

  const ConstrainedTarget& target() const { return *target_; }
  const TargetPtr& target_ptr() const { return target_; }
  const MirrorMap& map() const { return map_; }
  int dim() const { return map_.dim(); }

  double dual_potential(VecRef y) const;
  /// -grad W(y) = J(x) (grad log pi(x) - grad log det hess phi(x)).
  Vec dual_score(VecRef y) const;
  /// Same quantity formed from the free-coordinate primal score through
  /// MirrorMap::hessian_inverse_apply; loses precision near the boundary.
  Vec dual_score_generic(VecRef y) const;
  /// d s_nu / dy (symmetric d x d).
  Mat dual_score_jacobian(VecRef y) const;

 private:
  TargetPtr target_;
  MirrorMap map_;
};

}  // namespace mirrorcoin
