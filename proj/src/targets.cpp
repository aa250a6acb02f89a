#include "mirrorcoin/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mirrorcoin {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Simplex:
      return "simplex";
    case DomainKind::Orthant:
      return "orthant";
    case DomainKind::Box:
      return "box";
  }
  return "unknown";
}

bool Domain::contains(VecRef x) const {
  if (x.size() != dim || !x.allFinite()) return false;
  switch (kind) {
    case DomainKind::Simplex:
      return (x.array() > kInteriorFloor).all() && 1.0 - x.sum() > kInteriorFloor;
    case DomainKind::Orthant:
      return (x.array() > kInteriorFloor).all();
    case DomainKind::Box:
      return (x.array() > lo + kInteriorFloor).all() && (x.array() < hi - kInteriorFloor).all();
  }
  return false;
}

bool Domain::contains_open(VecRef x) const {
  if (x.size() != dim || !x.allFinite()) return false;
  switch (kind) {
    case DomainKind::Simplex:
      return (x.array() > 0.0).all() && x.sum() < 1.0;
    case DomainKind::Orthant:
      return (x.array() > 0.0).all();
    case DomainKind::Box:
      return (x.array() > lo).all() && (x.array() < hi).all();
  }
  return false;
}

// ---------------------------------------------------------------------------

Vec ConstrainedTarget::to_ambient(VecRef x) const {
  if (domain().kind != DomainKind::Simplex) return x;
  Vec full(x.size() + 1);
  full.head(x.size()) = x;
  full[x.size()] = 1.0 - x.sum();
  return full;
}

double ConstrainedTarget::log_density(VecRef x) const {
  if (!domain().contains(x)) throw DomainViolation(name() + ": point outside the domain");
  return ambient_log_density(to_ambient(x));
}

Vec ConstrainedTarget::primal_score(VecRef x) const {
  if (!domain().contains(x)) throw DomainViolation(name() + ": point outside the domain");
  return primal_score_unchecked(x);
}

Vec ConstrainedTarget::primal_score_unchecked(VecRef x) const {
  const Vec g = ambient_score(to_ambient(x));
  if (domain().kind != DomainKind::Simplex) return g;
  const Eigen::Index d = x.size();
  return (g.head(d).array() - g[d]).matrix();
}

GroundTruth ConstrainedTarget::sample_ground_truth(int, Rng&) const {
  throw Unsupported(name() + ": no built-in ground-truth sampler; supply a sample file");
}

// ---------------------------------------------------------------------------

SparseDirichlet::SparseDirichlet(Vec alpha, Vec counts) {
  if (alpha.size() < 2 || alpha.size() != counts.size()) {
    throw std::invalid_argument("sparse_dirichlet: alpha and counts need d+1 >= 2 matching entries");
  }
  if (!(alpha.array() > 0.0).all()) throw std::invalid_argument("sparse_dirichlet: alpha must be > 0");
  if (!(counts.array() >= 0.0).all()) throw std::invalid_argument("sparse_dirichlet: counts must be >= 0");
  conc_ = alpha + counts;
}

Domain SparseDirichlet::domain() const {
  return {DomainKind::Simplex, static_cast<int>(conc_.size() - 1)};
}

double SparseDirichlet::ambient_log_density(VecRef full) const {
  return ((conc_.array() - 1.0) * full.array().log()).sum();
}

Vec SparseDirichlet::ambient_score(VecRef full) const {
  return ((conc_.array() - 1.0) / full.array()).matrix();
}

Mat SparseDirichlet::ambient_score_jacobian(VecRef full) const {
  return (-(conc_.array() - 1.0) / full.array().square()).matrix().asDiagonal();
}

Vec SparseDirichlet::posterior_mean() const {
  return (conc_ / conc_.sum()).head(conc_.size() - 1);
}

GroundTruth SparseDirichlet::sample_ground_truth(int n, Rng& rng) const {
  const Eigen::Index d = conc_.size() - 1;
  Cloud out(n, d);
  std::vector<std::gamma_distribution<double>> gammas;
  for (Eigen::Index k = 0; k <= d; ++k) gammas.emplace_back(conc_[k], 1.0);
  Vec g(d + 1);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k <= d; ++k) g[k] = gammas[static_cast<std::size_t>(k)](rng);
    out.row(i) = (g.head(d) / g.sum()).transpose();
  }
  return {std::move(out), "dirichlet-gamma"};
}

// ---------------------------------------------------------------------------

QuadraticSimplex::QuadraticSimplex(Mat a, double sigma) : a_(std::move(a)), sigma_(sigma) {
  if (a_.rows() < 1 || a_.rows() != a_.cols()) throw std::invalid_argument("quadratic: A must be square");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("quadratic: sigma must be > 0");
  if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("quadratic: A must be symmetric");
  }
  if (a_.cwiseAbs().maxCoeff() > 1.0 + 1e-12) throw std::invalid_argument("quadratic: |A_ij| must be <= 1");
  Eigen::SelfAdjointEigenSolver<Mat> eig(a_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("quadratic: A must be PSD");
}

Mat QuadraticSimplex::random_matrix(int dim, Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat b(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) b(i, j) = unif(rng);
  Mat m = b.transpose() * b;
  m = 0.5 * (m + m.transpose());
  return m / m.cwiseAbs().maxCoeff();
}

Domain QuadraticSimplex::domain() const { return {DomainKind::Simplex, static_cast<int>(a_.rows())}; }

double QuadraticSimplex::ambient_log_density(VecRef full) const {
  const auto x = full.head(a_.rows());
  return -x.dot(a_ * x) / (2.0 * sigma_ * sigma_);
}

Vec QuadraticSimplex::ambient_score(VecRef full) const {
  const Eigen::Index d = a_.rows();
  Vec g = Vec::Zero(d + 1);
  g.head(d) = -(a_ * full.head(d)) / (sigma_ * sigma_);
  return g;
}

Mat QuadraticSimplex::ambient_score_jacobian(VecRef) const {
  const Eigen::Index d = a_.rows();
  Mat jac = Mat::Zero(d + 1, d + 1);
  jac.topLeftCorner(d, d) = -a_ / (sigma_ * sigma_);
  return jac;
}

GroundTruth QuadraticSimplex::sample_ground_truth(int n, Rng& rng) const {
  const int d = static_cast<int>(a_.rows());
  if (d > 3) throw Unsupported("quadratic: built-in ground truth only for d <= 3");
  const int m = kGridResolution;
  const double half = 0.5 / m;
  const double inv2s2 = 1.0 / (2.0 * sigma_ * sigma_);

  // Cubes whose lower corner lies in the simplex, each with an upper bound on
  // the density from convexity: q(x) >= q(c) - 2 |Ac|_1 half_width.
  std::vector<Vec> lower;
  std::vector<double> log_bound;
  std::vector<int> idx(d, 0);
  while (true) {
    int total = 0;
    for (int v : idx) total += v;
    if (total < m) {
      Vec corner(d);
      for (int k = 0; k < d; ++k) corner[k] = static_cast<double>(idx[k]) / m;
      const Vec centre = corner.array() + half;
      const Vec ac = a_ * centre;
      const double qmin = std::max(0.0, centre.dot(ac) - 2.0 * ac.lpNorm<1>() * half);
      lower.push_back(corner);
      log_bound.push_back(-qmin * inv2s2);
    }
    int k = 0;
    while (k < d && ++idx[k] == m) idx[k++] = 0;
    if (k == d) break;
  }
  const double top = *std::max_element(log_bound.begin(), log_bound.end());
  std::vector<double> weights(log_bound.size());
  for (std::size_t c = 0; c < weights.size(); ++c) weights[c] = std::exp(log_bound[c] - top);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Cloud out(n, d);
  Vec x(d);
  for (int i = 0; i < n;) {
    const std::size_t c = pick(rng);
    for (int k = 0; k < d; ++k) x[k] = lower[c][k] + unit(rng) / m;
    if (!((x.array() > 0.0).all() && x.sum() < 1.0)) continue;
    const double log_accept = -x.dot(a_ * x) * inv2s2 - log_bound[c];
    if (std::log(unit(rng)) < log_accept) out.row(i++) = x.transpose();
  }
  std::ostringstream method;
  method << "grid-envelope-rejection(resolution=" << m << ")";
  return {std::move(out), method.str()};
}

// ---------------------------------------------------------------------------

UniformBox::UniformBox(int dim, double lo, double hi) : dim_(dim), lo_(lo), hi_(hi) {
  if (dim < 1) throw std::invalid_argument("uniform_box: dim must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("uniform_box: need hi > lo");
}

Domain UniformBox::domain() const { return {DomainKind::Box, dim_, lo_, hi_}; }
double UniformBox::ambient_log_density(VecRef) const { return 0.0; }
Vec UniformBox::ambient_score(VecRef) const { return Vec::Zero(dim_); }
Mat UniformBox::ambient_score_jacobian(VecRef) const { return Mat::Zero(dim_, dim_); }

GroundTruth UniformBox::sample_ground_truth(int n, Rng& rng) const {
  std::uniform_real_distribution<double> unif(lo_, hi_);
  Cloud out(n, dim_);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim_; ++k) out(i, k) = unif(rng);
  return {std::move(out), "iid-uniform"};
}

// ---------------------------------------------------------------------------

ExponentialOrthant::ExponentialOrthant(int dim, double rate) : dim_(dim), rate_(rate) {
  if (dim < 1) throw std::invalid_argument("exponential: dim must be >= 1");
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
}

Domain ExponentialOrthant::domain() const { return {DomainKind::Orthant, dim_}; }
double ExponentialOrthant::ambient_log_density(VecRef x) const { return -rate_ * x.sum(); }
Vec ExponentialOrthant::ambient_score(VecRef) const { return Vec::Constant(dim_, -rate_); }
Mat ExponentialOrthant::ambient_score_jacobian(VecRef) const { return Mat::Zero(dim_, dim_); }

GroundTruth ExponentialOrthant::sample_ground_truth(int n, Rng& rng) const {
  std::exponential_distribution<double> expo(rate_);
  Cloud out(n, dim_);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim_; ++k) out(i, k) = expo(rng);
  return {std::move(out), "iid-exponential"};
}

// ---------------------------------------------------------------------------

LogNormalOrthant::LogNormalOrthant(int dim, double mu, double sigma)
    : dim_(dim), mu_(mu), sigma_(sigma) {
  if (dim < 1) throw std::invalid_argument("lognormal: dim must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("lognormal: sigma must be > 0");
}

Domain LogNormalOrthant::domain() const { return {DomainKind::Orthant, dim_}; }

double LogNormalOrthant::ambient_log_density(VecRef x) const {
  const auto lx = x.array().log();
  return (-(lx - mu_).square() / (2.0 * sigma_ * sigma_) - lx).sum();
}

Vec LogNormalOrthant::ambient_score(VecRef x) const {
  const auto lx = x.array().log();
  return (-(lx - mu_) / (sigma_ * sigma_ * x.array()) - x.array().inverse()).matrix();
}

Mat LogNormalOrthant::ambient_score_jacobian(VecRef x) const {
  const auto lx = x.array().log();
  const auto x2 = x.array().square();
  const Vec diag = ((lx - mu_ - 1.0) / (sigma_ * sigma_ * x2) + 1.0 / x2).matrix();
  return diag.asDiagonal();
}

GroundTruth LogNormalOrthant::sample_ground_truth(int n, Rng& rng) const {
  std::lognormal_distribution<double> ln(mu_, sigma_);
  Cloud out(n, dim_);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim_; ++k) out(i, k) = ln(rng);
  return {std::move(out), "iid-lognormal"};
}

// ---------------------------------------------------------------------------

double log_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -35.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio asymptotics where erfc underflows.
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
}

double log_normal_cdf_diff(double a, double c) {
  if (!(a > c)) return -std::numeric_limits<double>::infinity();
  if (c > 0.0) return log_normal_cdf_diff(-c, -a);
  const double la = log_normal_cdf(a);
  const double lc = log_normal_cdf(c);
  return la + std::log1p(-std::exp(lc - la));
}

namespace {

double log_normal_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

struct TruncTerm {
  double value, d1, d2;
};

// l(u) = log[Phi((lam-u)/tau) - Phi((-lam-u)/tau)] and its first two derivatives.
TruncTerm truncated_term(double u, double lambda, double tau) {
  const double a = (lambda - u) / tau;
  const double c = (-lambda - u) / tau;
  const double l = log_normal_cdf_diff(a, c);
  const double ra = std::exp(log_normal_pdf(a) - l);
  const double rc = std::exp(log_normal_pdf(c) - l);
  const double d1 = (rc - ra) / tau;
  const double d2 = (c * rc - a * ra) / (tau * tau) - d1 * d1;
  return {l, d1, d2};
}

}  // namespace

SelectiveLasso::SelectiveLasso(LassoSelection sel) : sel_(std::move(sel)) {
  const Eigen::Index n = sel_.design.rows();
  const Eigen::Index p = sel_.design.cols();
  if (sel_.response.size() != n) throw std::invalid_argument("selective_lasso: response size mismatch");
  if (sel_.active.empty()) throw std::invalid_argument("selective_lasso: active set is empty");
  if (sel_.active.size() != sel_.signs.size()) {
    throw std::invalid_argument("selective_lasso: signs must match the active set");
  }
  if (!(sel_.lambda > 0.0) || !(sel_.tau > 0.0) || !(sel_.ridge > 0.0)) {
    throw std::invalid_argument("selective_lasso: lambda, ridge and tau must be > 0");
  }
  const auto q = static_cast<Eigen::Index>(sel_.active.size());
  std::vector<bool> in_active(static_cast<std::size_t>(p), false);
  x_active_.resize(n, q);
  z_.resize(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const int j = sel_.active[static_cast<std::size_t>(k)];
    if (j < 0 || j >= p || in_active[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument("selective_lasso: bad active index");
    }
    const int s = sel_.signs[static_cast<std::size_t>(k)];
    if (s != 1 && s != -1) throw std::invalid_argument("selective_lasso: signs must be +-1");
    in_active[static_cast<std::size_t>(j)] = true;
    x_active_.col(k) = sel_.design.col(j);
    z_[k] = s;
  }
  x_inactive_.resize(n, p - q);
  for (Eigen::Index j = 0, c = 0; j < p; ++j) {
    if (!in_active[static_cast<std::size_t>(j)]) x_inactive_.col(c++) = sel_.design.col(j);
  }
  gram_ridge_ = x_active_.transpose() * x_active_;
  gram_ridge_.diagonal().array() += sel_.ridge;
  cross_ = x_active_.transpose() * x_inactive_;
}

Domain SelectiveLasso::domain() const {
  return {DomainKind::Orthant, static_cast<int>(sel_.active.size())};
}

SelectiveLasso::Terms SelectiveLasso::terms(VecRef b) const {
  const Vec beta = z_.cwiseProduct(b);
  const Vec resid = sel_.response - x_active_ * beta;
  Vec omega = sel_.ridge * beta - x_active_.transpose() * resid + sel_.lambda * z_;
  Vec u = x_inactive_.transpose() * resid;
  return {std::move(omega), std::move(u)};
}

double SelectiveLasso::ambient_log_density(VecRef b) const {
  const Terms t = terms(b);
  double out = -t.omega_e.squaredNorm() / (2.0 * sel_.tau * sel_.tau);
  for (Eigen::Index j = 0; j < t.u_inactive.size(); ++j) {
    out += truncated_term(t.u_inactive[j], sel_.lambda, sel_.tau).value;
  }
  return out;
}

Vec SelectiveLasso::ambient_score(VecRef b) const {
  const Terms t = terms(b);
  Vec dl(t.u_inactive.size());
  for (Eigen::Index j = 0; j < dl.size(); ++j) {
    dl[j] = truncated_term(t.u_inactive[j], sel_.lambda, sel_.tau).d1;
  }
  const Vec inner = -(gram_ridge_ * t.omega_e) / (sel_.tau * sel_.tau) - cross_ * dl;
  return z_.cwiseProduct(inner);
}

Mat SelectiveLasso::ambient_score_jacobian(VecRef b) const {
  const Terms t = terms(b);
  Vec d2(t.u_inactive.size());
  for (Eigen::Index j = 0; j < d2.size(); ++j) {
    d2[j] = truncated_term(t.u_inactive[j], sel_.lambda, sel_.tau).d2;
  }
  const Mat inner = -(gram_ridge_ * gram_ridge_) / (sel_.tau * sel_.tau) +
                    cross_ * d2.asDiagonal() * cross_.transpose();
  return z_.asDiagonal() * inner * z_.asDiagonal();
}

LassoSelection SelectiveLasso::synthetic(int n, int p, double rho, double lambda, double tau,
                                         Rng& rng) {
  if (n < 2 || p < 1) throw std::invalid_argument("selective_lasso: need n >= 2 and p >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("selective_lasso: rho must be in [0, 1)");
  std::normal_distribution<double> normal(0.0, 1.0);
  LassoSelection sel;
  sel.design.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const double shared = normal(rng);
    for (int j = 0; j < p; ++j) {
      sel.design(i, j) = std::sqrt(1.0 - rho) * normal(rng) + std::sqrt(rho) * shared;
    }
  }
  for (int j = 0; j < p; ++j) sel.design.col(j).normalize();
  sel.response.resize(n);
  for (int i = 0; i < n; ++i) sel.response[i] = normal(rng);
  const double mean = sel.response.mean();
  const double var = (sel.response.array() - mean).square().sum() / (n - 1);
  sel.ridge = var / std::sqrt(static_cast<double>(n));
  sel.lambda = lambda;
  sel.tau = tau;

  Vec omega(p);
  for (int j = 0; j < p; ++j) omega[j] = tau * normal(rng);

  // Coordinate descent on 1/2|y - X b|^2 + lam |b|_1 - omega^T b + ridge/2 |b|^2.
  Vec beta = Vec::Zero(p);
  Vec resid = sel.response;
  const Vec col_sq = sel.design.colwise().squaredNorm().transpose();
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double change = 0.0;
    for (int j = 0; j < p; ++j) {
      const double rho_j = sel.design.col(j).dot(resid) + col_sq[j] * beta[j] + omega[j];
      const double shrunk = std::copysign(std::max(std::abs(rho_j) - lambda, 0.0), rho_j);
      const double next = shrunk / (col_sq[j] + sel.ridge);
      if (next != beta[j]) {
        resid -= sel.design.col(j) * (next - beta[j]);
        change = std::max(change, std::abs(next - beta[j]));
        beta[j] = next;
      }
    }
    if (change < 1e-13) break;
  }
  for (int j = 0; j < p; ++j) {
    if (beta[j] != 0.0) {
      sel.active.push_back(j);
      sel.signs.push_back(beta[j] > 0.0 ? 1 : -1);
    }
  }
  if (sel.active.empty()) throw Unsupported("selective_lasso: randomised Lasso selected nothing");
  return sel;
}

// ---------------------------------------------------------------------------

MirroredTarget::MirroredTarget(TargetPtr target, MirrorMap map)
    : target_(std::move(target)), map_(map) {
  const Domain dom = target_->domain();
  const bool ok = (dom.kind == DomainKind::Simplex && map_.kind() == MapKind::EntropicSimplex) ||
                  (dom.kind == DomainKind::Orthant && map_.kind() == MapKind::PositiveOrthant);
  if (!ok) {
    throw ConfigError("map", to_string(map_.kind()) + " map does not fit a " + to_string(dom.kind) +
                                 " target");
  }
  if (dom.dim != map_.dim()) throw ConfigError("map", "map and target dimensions differ");
}

double MirroredTarget::dual_potential(VecRef y) const {
  const Vec full = map_.dual_to_full(y);
  // log det hess phi = -sum over every (ambient) coordinate of log x_k.
  return -target_->ambient_log_density(full) - full.array().log().sum();
}

Vec MirroredTarget::dual_score(VecRef y) const {
  const Vec full = map_.dual_to_full(y);
  const Vec g = target_->ambient_score(full);
  const Eigen::Index d = map_.dim();
  if (map_.kind() == MapKind::PositiveOrthant) {
    return (full.array() * g.array() + 1.0).matrix();
  }
  const Vec xg = (full.array() * g.array()).matrix();
  const double m = xg.sum();
  const auto x = full.head(d).array();
  return (xg.head(d).array() - x * m + 1.0 - static_cast<double>(d + 1) * x).matrix();
}

Vec MirroredTarget::dual_score_generic(VecRef y) const {
  const Vec x = map_.dual_to_primal(y);
  return map_.hessian_inverse_apply(x, target_->primal_score(x) - map_.grad_log_det_hessian(x));
}

Mat MirroredTarget::dual_score_jacobian(VecRef y) const {
  const Vec full = map_.dual_to_full(y);
  const Vec g = target_->ambient_score(full);
  const Mat hess = target_->ambient_score_jacobian(full);
  const Eigen::Index d = map_.dim();
  if (map_.kind() == MapKind::PositiveOrthant) {
    Mat s = full.asDiagonal() * hess * full.asDiagonal();
    s.diagonal() += (full.array() * g.array()).matrix();
    return s;
  }
  // Jf = d full / dy, (d+1) x d: x_k (delta_kj - x_j).
  const Vec x = full.head(d);
  Mat jf = -full * x.transpose();
  jf.topRows(d).diagonal() += x;
  const Mat gj = hess * jf;
  const double m = full.dot(g);
  const Vec dm = jf.transpose() * g + gj.transpose() * full;
  Mat s(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      s(i, j) = jf(i, j) * (g[i] - m - static_cast<double>(d + 1)) + full[i] * gj(i, j) -
                full[i] * dm[j];
    }
  }
  return s;
}

}  // namespace mirrorcoin
