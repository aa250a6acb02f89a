#pragma once

#include <optional>

#include "mirrorcoin/geometry.hpp"
#include "mirrorcoin/types.hpp"

namespace mirrorcoin {

enum class KernelFamily { IMQ, RBF };

// Where the median heuristic measures pairwise distances.
enum class BandwidthSpace { Dual, Primal };

struct KernelConfig {
  KernelFamily family = KernelFamily::IMQ;
  // Empty means the median heuristic, re-resolved every iteration.
  std::optional<double> fixed_bandwidth;
  BandwidthSpace median_space = BandwidthSpace::Dual;
};

struct KernelValueGrad {
  double value;
  Vec grad_x;  // gradient in the first argument
};

struct MirroredValueGrad {
  double value;
  Vec grad_y;        // first argument, dual coordinates
  Vec grad_y_other;  // second argument, dual coordinates
};

/// Radial profile k = f(u), u = |x - x'|^2 / h^2, with derivatives in u.
/// IMQ: f = (1+u)^{-1/2}; RBF: f = exp(-u).
struct RadialProfile {
  double f, df, d2f, d3f;
};
RadialProfile radial_profile(KernelFamily family, double u);

KernelValueGrad base_eval_grad(KernelFamily family, double h, VecRef x, VecRef x_other);

/// h = sqrt(med^2 / log N), med the median pairwise Euclidean distance
/// (mean of the two middle values when the pair count is even).
/// Throws DegenerateCloud when every pairwise distance is zero.
double median_bandwidth(const Cloud& points);

/// k_phi(y, y') = k(grad phi*(y), grad phi*(y')) and its dual gradients.
MirroredValueGrad mirrored_eval_grad(KernelFamily family, double h, const MirrorMap& map,
                                     VecRef y, VecRef y_other);

}  // namespace mirrorcoin
