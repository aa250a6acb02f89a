#include "mirrorcoin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mirrorcoin {

RadialProfile radial_profile(KernelFamily family, double u) {
  if (family == KernelFamily::RBF) {
    const double f = std::exp(-u);
    return {f, -f, f, -f};
  }
  const double base = 1.0 + u;
  const double f = 1.0 / std::sqrt(base);
  const double f3 = f / base;   // (1+u)^{-3/2}
  const double f5 = f3 / base;  // (1+u)^{-5/2}
  const double f7 = f5 / base;
  return {f, -0.5 * f3, 0.75 * f5, -1.875 * f7};
}

KernelValueGrad base_eval_grad(KernelFamily family, double h, VecRef x, VecRef x_other) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const Vec delta = x - x_other;
  const double h2 = h * h;
  const RadialProfile p = radial_profile(family, delta.squaredNorm() / h2);
  return {p.f, delta * (2.0 * p.df / h2)};
}

double median_bandwidth(const Cloud& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw std::invalid_argument("median heuristic needs at least two points");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double med = dist[mid];
  if (m % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + mid);
    med = 0.5 * (med + lower);
  }
  if (!(med > 0.0)) {
    throw DegenerateCloud("median pairwise distance is zero; particles have collapsed");
  }
  return std::sqrt(med * med / std::log(static_cast<double>(n)));
}

MirroredValueGrad mirrored_eval_grad(KernelFamily family, double h, const MirrorMap& map,
                                     VecRef y, VecRef y_other) {
  const Vec x = map.dual_to_primal(y);
  const Vec x_other = map.dual_to_primal(y_other);
  const KernelValueGrad kg = base_eval_grad(family, h, x, x_other);
  // grad_{x'} k = -grad_x k for translation-invariant kernels.
  return {kg.value, map.hessian_inverse_apply(x, kg.grad_x),
          map.hessian_inverse_apply(x_other, -kg.grad_x)};
}

}  // namespace mirrorcoin
