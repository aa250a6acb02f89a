#pragma once

#include "mirrorcoin/kernels.hpp"
#include "mirrorcoin/targets.hpp"

namespace mirrorcoin {

/// Per-particle quantities the mirrored Stein kernel needs: primal point,
/// inverse Hessian J = d x / d y, dual score and its Jacobian.
struct SteinPoint {
  Vec x;
  Mat jac;        // J(x), symmetric
  Vec score;      // s_nu(y)
  Mat score_jac;  // d s_nu / dy
};

SteinPoint make_stein_point(const MirroredTarget& mt, VecRef y);

/// k_{nu,phi}(y, y') = s^T k s' + s^T grad_{y'} k_phi + grad_y k_phi^T s'
///                     + tr(d^2 k_phi / dy dy'^T)
double stein_value(const MirrorMap& map, KernelFamily family, double h, const SteinPoint& p,
                   const SteinPoint& q);

/// Gradient of k_{nu,phi}(y, y') with respect to its second argument y'.
Vec stein_grad_second(const MirrorMap& map, KernelFamily family, double h, const SteinPoint& p,
                      const SteinPoint& q);

double stein_kernel_eval(const MirroredTarget& mt, KernelFamily family, double h, VecRef y,
                         VecRef y_other);

}  // namespace mirrorcoin
