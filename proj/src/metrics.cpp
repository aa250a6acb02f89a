#include "mirrorcoin/metrics.hpp"

#include "mirrorcoin/pairwise.hpp"

namespace mirrorcoin {

double energy_distance(const Cloud& a, const Cloud& b) { return parallel::energy_distance(a, b); }

MetricReport energy_distance_report(const Cloud& a, const Cloud& b) {
  return {"energy_distance", energy_distance(a, b), static_cast<long>(a.rows()),
          static_cast<long>(b.rows()), std::nullopt, std::nullopt};
}

double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  return parallel::ksd_vstat(y, mt, family, h);
}

MetricReport ksd_report(const Cloud& y, const MirroredTarget& mt, KernelFamily family,
                        std::optional<double> bandwidth) {
  const double h = bandwidth ? *bandwidth : median_bandwidth(y);
  return {"ksd", ksd_vstat(y, mt, family, h), static_cast<long>(y.rows()),
          static_cast<long>(y.rows()), h, std::nullopt};
}

Moments summary_moments(const Cloud& a) {
  if (a.rows() < 2) throw std::invalid_argument("summary_moments needs at least two samples");
  const double n = static_cast<double>(a.rows());
  Moments m;
  m.mean = a.colwise().sum().transpose() / n;
  const Cloud centered = a.rowwise() - m.mean.transpose();
  m.variance = centered.cwiseAbs2().colwise().sum().transpose() / (n - 1.0);
  return m;
}

}  // namespace mirrorcoin
