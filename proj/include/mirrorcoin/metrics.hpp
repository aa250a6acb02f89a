#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mirrorcoin/kernels.hpp"
#include "mirrorcoin/targets.hpp"

namespace mirrorcoin {

struct MetricReport {
  std::string name;
  double value = 0.0;
  long n_a = 0;
  long n_b = 0;
  std::optional<double> bandwidth;
  std::optional<std::uint64_t> seed;
};

/// V-statistic energy distance on primal samples.
MetricReport energy_distance_report(const Cloud& a, const Cloud& b);
double energy_distance(const Cloud& a, const Cloud& b);

/// Squared mirrored KSD estimate (1/N^2) sum_ij k_{nu,phi}(y_i, y_j). With
/// no bandwidth given the median heuristic on y is used.
MetricReport ksd_report(const Cloud& y, const MirroredTarget& mt, KernelFamily family,
                        std::optional<double> bandwidth = std::nullopt);
double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);

struct Moments {
  Vec mean;
  Vec variance;  // unbiased, divisor n - 1
};

Moments summary_moments(const Cloud& a);

}  // namespace mirrorcoin
