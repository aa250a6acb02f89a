#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "mirrorcoin/metrics.hpp"
#include "mirrorcoin/samplers.hpp"
#include "test_support.hpp"

using namespace mirrorcoin;

namespace {

double literal_energy_distance(const Cloud& a, const Cloud& b) {
  auto mean_dist = [](const Cloud& p, const Cloud& q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < q.rows(); ++j) s += (p.row(i) - q.row(j)).norm();
    return s / double(p.rows() * q.rows());
  };
  return 2 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

}  // namespace

TEST(EnergyDistance, HandValues) {
  Rng rng(1);
  const Cloud a = testsupport::normal_cloud(30, 3, rng);
  EXPECT_NEAR(energy_distance(a, a), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(energy_distance(Cloud::Zero(1, 1), Cloud::Ones(1, 1)), 2.0);
}

TEST(EnergyDistance, MatchesLiteralFormulaAndIsSymmetric) {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const Cloud a = testsupport::normal_cloud(20 + rep, 2, rng);
    const Cloud b = testsupport::normal_cloud(13, 2, rng, 1.5);
    const double ab = energy_distance(a, b);
    EXPECT_NEAR(ab, literal_energy_distance(a, b), 1e-12);
    EXPECT_EQ(ab, energy_distance(b, a));
    EXPECT_GE(ab, -1e-12);
  }
}

TEST(EnergyDistance, InvariantUnderRowPermutation) {
  Rng rng(3);
  const Cloud a = testsupport::normal_cloud(25, 2, rng);
  const Cloud b = testsupport::normal_cloud(25, 2, rng, 0.5);
  Cloud pa = a, pb = b;
  pa.row(0).swap(pa.row(24));
  pb.row(3).swap(pb.row(7));
  EXPECT_NEAR(energy_distance(a, b), energy_distance(pa, pb), 1e-13);
}

TEST(EnergyDistance, ReportCarriesCounts) {
  const auto rep = energy_distance_report(Cloud::Zero(3, 2), Cloud::Ones(5, 2));
  EXPECT_EQ(rep.name, "energy_distance");
  EXPECT_EQ(rep.n_a, 3);
  EXPECT_EQ(rep.n_b, 5);
}

TEST(Moments, HandValues) {
  Cloud two(2, 1);
  two << 0.0, 2.0;
  const auto m = summary_moments(two);
  EXPECT_DOUBLE_EQ(m.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(m.variance[0], 2.0);
  const auto c = summary_moments(Cloud::Constant(4, 3, 0.7));
  EXPECT_TRUE(c.variance.isZero(0.0));
  EXPECT_THROW(summary_moments(Cloud::Zero(1, 2)), std::invalid_argument);
}

TEST(Ksd, TargetSamplesScoreBelowShiftedCloud) {
  auto t = std::make_shared<ExponentialOrthant>(2, 1.0);
  MirroredTarget mt(t, MirrorMap::positive_orthant(2));
  Rng rng = make_stream(1, StreamTag::GroundTruth);
  const Cloud x = t->sample_ground_truth(500, rng).samples;
  Cloud y = x.array().log();
  const Cloud shifted = y.array() + 1.0;
  const double h = median_bandwidth(y);
  EXPECT_LT(ksd_vstat(y, mt, KernelFamily::IMQ, h), ksd_vstat(shifted, mt, KernelFamily::IMQ, h));
}

TEST(Ksd, SinglePointReducesToTraceTerm) {
  MirroredTarget mt(std::make_shared<ExponentialOrthant>(3, 1.0), MirrorMap::positive_orthant(3));
  const auto rep = ksd_report(Cloud::Zero(1, 3), mt, KernelFamily::IMQ, 0.9);
  EXPECT_NEAR(rep.value, 3 / 0.81, 1e-12);
  EXPECT_EQ(rep.bandwidth, 0.9);
}

TEST(Ksd, DecreasesAlongCoinMsvgd) {
  auto t = std::make_shared<ExponentialOrthant>(2, 1.0);
  const auto map = MirrorMap::positive_orthant(2);
  MirroredTarget mt(t, map);
  RunConfig cfg;
  cfg.particles = 50;
  cfg.iterations = 500;
  cfg.init = parse_init_spec("exponential:3");
  const auto rec = run(cfg, t, map);
  const Cloud y0 = rec.initial_primal.array().log();
  const double h = median_bandwidth(y0);
  EXPECT_LE(ksd_vstat(*rec.final_dual, mt, KernelFamily::IMQ, h), 0.2 * ksd_vstat(y0, mt, KernelFamily::IMQ, h));
}
