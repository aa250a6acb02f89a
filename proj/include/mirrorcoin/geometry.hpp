#pragma once

#include <string>

#include "mirrorcoin/types.hpp"

namespace mirrorcoin {

enum class MapKind { EntropicSimplex, PositiveOrthant };

std::string to_string(MapKind kind);

/// Mirror map of Legendre type between a constrained domain and R^d.
///
/// EntropicSimplex(d) acts on the open simplex {x > 0, sum(x) < 1} in d free
/// coordinates; the (d+1)-th coordinate 1 - sum(x) is implicit everywhere.
/// PositiveOrthant(d) acts on the open orthant with phi(x) = sum(x log x - x).
///
/// Throughout, J(x) = [hess phi(x)]^{-1} is also the Jacobian of the inverse
/// map y -> x at y = grad phi(x).
class MirrorMap {
 public:
  static MirrorMap entropic_simplex(int dim);
  static MirrorMap positive_orthant(int dim);

  MapKind kind() const { return kind_; }
  int dim() const { return dim_; }

  /// Every free coordinate > kInteriorFloor and, on the simplex,
  /// 1 - sum(x) > kInteriorFloor.
  bool is_interior(VecRef x) const;
  void require_interior(VecRef x) const;

  Vec primal_to_dual(VecRef x) const;
  Vec dual_to_primal(VecRef y) const;

  /// Simplex: all d+1 coordinates, the implicit one computed from the dual
  /// point directly so it keeps full relative precision when tiny.
  /// Orthant: identical to dual_to_primal.
  Vec dual_to_full(VecRef y) const;

  double log_det_hessian(VecRef x) const;
  Vec grad_log_det_hessian(VecRef x) const;

  Mat hessian(VecRef x) const;
  Mat hessian_inverse(VecRef x) const;
  Vec hessian_apply(VecRef x, VecRef v) const;
  Vec hessian_inverse_apply(VecRef x, VecRef v) const;

  /// -J(x) grad log det hess phi(x), in closed form
  /// (simplex: 1 - (d+1) x_i; orthant: 1).
  Vec dual_log_det_drift(VecRef x) const;

  /// out_j = sum_ab u_a v_b dJ_ab/dy_j for the rank-one weight u v^T.
  Vec jacobian_derivative_contract(VecRef x, VecRef u, VecRef v) const;
  /// out_j = sum_ab R_ab dJ_ab/dy_j for a general weight matrix.
  Vec jacobian_derivative_contract(VecRef x, const Mat& weights) const;

 private:
  MirrorMap(MapKind kind, int dim) : kind_(kind), dim_(dim) {}

  void require_dim(VecRef v, const char* what) const;

  MapKind kind_;
  int dim_;
};

}  // namespace mirrorcoin
