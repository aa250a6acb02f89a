#pragma once

#include "mirrorcoin/kernels.hpp"
#include "mirrorcoin/spectral.hpp"
#include "mirrorcoin/targets.hpp"

namespace mirrorcoin {

// Every O(N^2) particle interaction exists twice. The `serial` versions are
// plain double loops built from the single-pair kernel routines and serve as
// the reference in tests. The `parallel` versions cache per-particle
// quantities and split rows across OpenMP threads; each row is reduced by one
// thread in index order, so results do not depend on the thread count.

namespace serial {

/// Row i: (1/N) sum_j [k_phi(y_j, y_i) s_nu(y_j) + grad_{y_j} k_phi(y_j, y_i)].
Cloud msvgd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);

/// Euclidean SVGD in primal coordinates; scores are taken at the given
/// points without a domain check so that floored points are accepted.
Cloud svgd_direction(const Cloud& x, const ConstrainedTarget& target, KernelFamily family,
                     double h);

/// Row i: -(1/N^2) sum_j grad_2 k_{nu,phi}(y_j, y_i).
Cloud mksdd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);

/// (1/N^2) sum_ij k_{nu,phi}(y_i, y_j).
double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);

/// Row i: -(1/N) sum_j d/dy_i k(y_i, y_j); one-dimensional clouds only.
Cloud mlawgd_direction(const Cloud& y, const HermiteSpectralKernel& kernel);

/// V-statistic energy distance between two clouds.
double energy_distance(const Cloud& a, const Cloud& b);

}  // namespace serial

namespace parallel {

Cloud msvgd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);
Cloud svgd_direction(const Cloud& x, const ConstrainedTarget& target, KernelFamily family,
                     double h);
Cloud mksdd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);
double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h);
Cloud mlawgd_direction(const Cloud& y, const HermiteSpectralKernel& kernel);
double energy_distance(const Cloud& a, const Cloud& b);

}  // namespace parallel

namespace detail {
// Canonical argument order for energy_distance, making it exactly symmetric.
bool energy_swap(const Cloud& a, const Cloud& b);
}  // namespace detail

/// Maps every row of a dual cloud to the primal domain.
Cloud dual_to_primal_rows(const MirrorMap& map, const Cloud& y);

}  // namespace mirrorcoin
