#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "mirrorcoin/metrics.hpp"
#include "mirrorcoin/targets.hpp"
#include "test_support.hpp"

using namespace mirrorcoin;
using testsupport::fd_gradient;
using testsupport::domain_point;
using testsupport::rel_err;

namespace {

std::shared_ptr<SparseDirichlet> sparse_dirichlet_20() {
  Vec alpha = Vec::Constant(21, 0.1);
  Vec counts = Vec::Zero(21);
  counts.head(3) << 90, 5, 5;
  return std::make_shared<SparseDirichlet>(alpha, counts);
}

std::shared_ptr<SelectiveLasso> synthetic_lasso() {
  Rng rng = make_stream(0, StreamTag::TargetData);
  return std::make_shared<SelectiveLasso>(SelectiveLasso::synthetic(100, 20, 0.3, 1.0, 1.0, rng));
}

std::shared_ptr<QuadraticSimplex> quadratic(int d, double sigma) {
  Rng rng = make_stream(0, StreamTag::TargetData);
  return std::make_shared<QuadraticSimplex>(QuadraticSimplex::random_matrix(d, rng), sigma);
}

}  // namespace

TEST(Targets, ScoreHandValues) {
  UniformBox box(3, -1.0, 1.0);
  EXPECT_TRUE(box.primal_score(Vec{{0.2, -0.7, 0.9}}).isZero(0.0));
  SparseDirichlet flat(Vec::Ones(2), Vec::Zero(2));
  EXPECT_NEAR(flat.primal_score(Vec::Constant(1, 0.3))[0], 0.0, 1e-15);
}

TEST(Targets, PrimalScoresMatchDifferencesAtFiftyPoints) {
  const std::vector<TargetPtr> targets = {
      sparse_dirichlet_20(),
      quadratic(5, 0.5),
      std::make_shared<UniformBox>(2, -1.0, 1.0),
      std::make_shared<ExponentialOrthant>(3, 1.5),
      std::make_shared<LogNormalOrthant>(2, 0.3, 0.8),
      synthetic_lasso(),
  };
  Rng rng(11);
  for (const auto& t : targets) {
    const Domain dom = t->domain();
    for (int rep = 0; rep < 50; ++rep) {
      const Vec x = domain_point(dom, rng);
      double step = 1e-6;
      if (dom.kind != DomainKind::Box) step *= std::min(x.minCoeff(), dom.kind == DomainKind::Simplex ? 1.0 - x.sum() : 1.0);
      const auto f = [&](const Vec& z) { return t->log_density(z); };
      EXPECT_LT(rel_err(t->primal_score(x), fd_gradient(f, x, step)), 1e-5) << t->name();
    }
  }
}

TEST(Targets, DualScoresMatchDifferencesOfDualPotential) {
  const std::vector<MirroredTarget> pairs = {
      MirroredTarget(sparse_dirichlet_20(), MirrorMap::entropic_simplex(20)),
      MirroredTarget(quadratic(5, 0.5), MirrorMap::entropic_simplex(5)),
      MirroredTarget(std::make_shared<ExponentialOrthant>(3, 1.0), MirrorMap::positive_orthant(3)),
      MirroredTarget(std::make_shared<LogNormalOrthant>(2, 0.3, 0.8), MirrorMap::positive_orthant(2)),
      MirroredTarget(synthetic_lasso(), MirrorMap::positive_orthant(synthetic_lasso()->dim())),
  };
  Rng rng(12);
  for (const auto& mt : pairs) {
    const Domain dom = mt.target().domain();
    for (int rep = 0; rep < 50; ++rep) {
      const Vec y = mt.map().primal_to_dual(domain_point(dom, rng));
      const auto w = [&](const Vec& z) { return mt.dual_potential(z); };
      const Vec fd = -fd_gradient(w, y, 1e-6);
      EXPECT_LT(rel_err(mt.dual_score(y), fd), 1e-5) << mt.target().name();
      EXPECT_LT(rel_err(mt.dual_score_generic(y), mt.dual_score(y)), 1e-9) << mt.target().name();
      const auto comp = [&](int k) {
        return [&, k](const Vec& z) { return mt.dual_score(z)[k]; };
      };
      const Mat jac = mt.dual_score_jacobian(y);
      for (int k = 0; k < mt.dim(); ++k) {
        EXPECT_LT(rel_err(Vec(jac.row(k).transpose()), fd_gradient(comp(k), y, 1e-6)), 1e-5)
            << mt.target().name() << " row " << k;
      }
    }
  }
}

TEST(Targets, ExponentialDualScoreHandValues) {
  MirroredTarget mt(std::make_shared<ExponentialOrthant>(2, 1.0), MirrorMap::positive_orthant(2));
  EXPECT_LT(mt.dual_score(Vec::Zero(2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(mt.dual_score(Vec::Constant(2, std::log(2.0)))[0], -1.0, 1e-14);
}

TEST(Targets, DualPotentialFollowsLogDetRelation) {
  const auto t = sparse_dirichlet_20();
  MirroredTarget mt(t, MirrorMap::entropic_simplex(20));
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec x = testsupport::simplex_point(20, rng);
    const double expected = -t->log_density(x) + mt.map().log_det_hessian(x);
    EXPECT_NEAR(mt.dual_potential(mt.map().primal_to_dual(x)), expected, 1e-9 * std::abs(expected));
  }
}

// With q = 1 and p = 2 the inactive subgradient is one scalar in [-1, 1];
// integrating the Gaussian randomisation density over it must reproduce the
// implemented marginal up to the constant log(tau sqrt(2 pi) / lambda).
TEST(Targets, SelectiveLassoMarginalMatchesQuadrature) {
  LassoSelection sel;
  sel.design.resize(3, 2);
  sel.design << 0.8, 0.3, -0.4, 0.9, 0.2, -0.5;
  sel.response = Vec{{1.1, -0.3, 0.6}};
  sel.lambda = 0.7;
  sel.ridge = 0.15;
  sel.tau = 0.9;
  sel.active = {0};
  sel.signs = {-1};
  SelectiveLasso target(sel);

  const Mat& x = sel.design;
  const double lam = sel.lambda, tau = sel.tau;
  const double shift = std::log(tau * std::sqrt(2.0 * std::numbers::pi) / lam);
  for (int rep = 0; rep < 20; ++rep) {
    const double b = 0.05 + 0.15 * rep;
    const double beta = -b;
    const Vec resid = sel.response - x.col(0) * beta;
    const double omega_e = sel.ridge * beta - x.col(0).dot(resid) + lam * -1.0;
    const double u = x.col(1).dot(resid);
    // Composite Simpson on [-1, 1].
    const int m = 20000;
    const double hstep = 2.0 / m;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double z = -1.0 + k * hstep;
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      const double om = lam * z - u;
      acc += w * std::exp(-om * om / (2 * tau * tau));
    }
    const double integral = acc * hstep / 3.0;
    const double joint_marginal = -omega_e * omega_e / (2 * tau * tau) + std::log(integral);
    EXPECT_NEAR(target.log_density(Vec::Constant(1, b)) + shift, joint_marginal, 1e-6) << "b=" << b;
  }
}

TEST(Targets, NormalCdfHelpersAreStableInTheTails) {
  EXPECT_NEAR(log_normal_cdf(0.0), std::log(0.5), 1e-15);
  EXPECT_NEAR(log_normal_cdf(-40.0), -804.608442013754, 1e-6);
  EXPECT_TRUE(std::isfinite(log_normal_cdf_diff(-38.0, -39.0)));
  EXPECT_NEAR(log_normal_cdf_diff(1.0, -1.0), std::log(0.6826894921370859), 1e-12);
}

TEST(GroundTruth, DirichletMeanWithinThreeStandardErrors) {
  const auto t = sparse_dirichlet_20();
  Rng rng = make_stream(7, StreamTag::GroundTruth);
  const int n = 100000;
  const auto gt = t->sample_ground_truth(n, rng);
  ASSERT_EQ(gt.samples.rows(), n);
  const double mean = 90.1 / 102.1;
  const double sd = std::sqrt(mean * (1 - mean) / (102.1 + 1.0));
  EXPECT_NEAR(gt.samples.col(0).mean(), mean, 3 * sd / std::sqrt(double(n)));
  // With alpha = 0.1 the implicit coordinate is often below double resolution
  // relative to 1, so the free coordinates can sum to 1 up to rounding.
  EXPECT_GT(gt.samples.minCoeff(), 0.0);
  EXPECT_LE(gt.samples.rowwise().sum().maxCoeff(), 1.0 + 1e-15);
}

TEST(GroundTruth, UniformBoxSymmetricAndInRange) {
  UniformBox box(2, -1.0, 1.0);
  Rng rng = make_stream(8, StreamTag::GroundTruth);
  const int n = 20000;
  const auto gt = box.sample_ground_truth(n, rng);
  const double se = std::sqrt(1.0 / 3.0 / n);
  EXPECT_NEAR(gt.samples.col(0).mean(), 0.0, 3 * se);
  EXPECT_NEAR(gt.samples.col(1).mean(), 0.0, 3 * se);
  EXPECT_GE(gt.samples.minCoeff(), -1.0);
  EXPECT_LE(gt.samples.maxCoeff(), 1.0);
}

TEST(GroundTruth, UnsupportedTargets) {
  Rng rng(1);
  EXPECT_THROW(synthetic_lasso()->sample_ground_truth(10, rng), Unsupported);
  EXPECT_THROW(quadratic(4, 1.0)->sample_ground_truth(10, rng), Unsupported);
}

// Independent oracle: plain rejection from the uniform distribution on the
// simplex, accepting with probability pi(x) / max pi.
TEST(GroundTruth, QuadraticOracleAgreesWithPlainRejection) {
  auto target = std::make_shared<QuadraticSimplex>(Mat::Identity(2, 2), 1.0);
  const int n = 1000;
  auto plain = [&](std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Cloud out(n, 2);
    for (int i = 0; i < n;) {
      const Vec x = testsupport::simplex_point(2, rng, 0.0);
      if (x.minCoeff() <= 0.0 || x.sum() >= 1.0) continue;
      if (std::log(u(rng)) < target->log_density(x)) out.row(i++) = x.transpose();
    }
    return out;
  };
  Rng rng = make_stream(3, StreamTag::GroundTruth);
  const Cloud oracle = target->sample_ground_truth(n, rng).samples;
  const Cloud ref_a = plain(101), ref_b = plain(202);
  const double floor = energy_distance(ref_a, ref_b);
  EXPECT_LE(energy_distance(oracle, ref_a), 2.0 * floor);
}
