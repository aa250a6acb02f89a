#include "mirrorcoin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mirrorcoin {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::EntropicSimplex:
      return "entropic";
    case MapKind::PositiveOrthant:
      return "orthant";
  }
  return "unknown";
}

MirrorMap MirrorMap::entropic_simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("entropic simplex map needs dim >= 1");
  return MirrorMap(MapKind::EntropicSimplex, dim);
}

MirrorMap MirrorMap::positive_orthant(int dim) {
  if (dim < 1) throw std::invalid_argument("orthant map needs dim >= 1");
  return MirrorMap(MapKind::PositiveOrthant, dim);
}

void MirrorMap::require_dim(VecRef v, const char* what) const {
  if (v.size() != dim_) {
    std::ostringstream os;
    os << what << ": expected dimension " << dim_ << ", got " << v.size();
    throw std::invalid_argument(os.str());
  }
}

bool MirrorMap::is_interior(VecRef x) const {
  if (x.size() != dim_) return false;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!(x[k] > kInteriorFloor) || !std::isfinite(x[k])) return false;
  }
  if (kind_ == MapKind::EntropicSimplex) return 1.0 - x.sum() > kInteriorFloor;
  return true;
}

void MirrorMap::require_interior(VecRef x) const {
  require_dim(x, "mirror map");
  if (!is_interior(x)) {
    std::ostringstream os;
    os << "point is not interior to the " << to_string(kind_) << " domain";
    throw DomainViolation(os.str());
  }
}

Vec MirrorMap::primal_to_dual(VecRef x) const {
  require_interior(x);
  if (kind_ == MapKind::PositiveOrthant) return x.array().log().matrix();
  const double log_last = std::log1p(-x.sum());
  return (x.array().log() - log_last).matrix();
}

Vec MirrorMap::dual_to_full(VecRef y) const {
  require_dim(y, "dual_to_primal");
  if (!y.allFinite()) throw DomainViolation("dual point has a non-finite coordinate");
  if (kind_ == MapKind::PositiveOrthant) return y.array().exp().matrix();

  // Shift by max(0, max y) so no exponential exceeds 1.
  const double shift = std::max(0.0, y.maxCoeff());
  Vec full(dim_ + 1);
  full.head(dim_) = (y.array() - shift).exp().matrix();
  full[dim_] = std::exp(-shift);
  full /= full.sum();
  return full;
}

Vec MirrorMap::dual_to_primal(VecRef y) const {
  Vec full = dual_to_full(y);
  if (kind_ == MapKind::PositiveOrthant) return full;
  return full.head(dim_);
}

double MirrorMap::log_det_hessian(VecRef x) const {
  require_interior(x);
  if (kind_ == MapKind::PositiveOrthant) return -x.array().log().sum();
  // det(diag(1/x) + 11^T / x_last) = prod(1/x) / x_last by the determinant lemma.
  return -x.array().log().sum() - std::log1p(-x.sum());
}

Vec MirrorMap::grad_log_det_hessian(VecRef x) const {
  require_interior(x);
  if (kind_ == MapKind::PositiveOrthant) return (-x.array().inverse()).matrix();
  const double last = 1.0 - x.sum();
  return (-x.array().inverse() + 1.0 / last).matrix();
}

Mat MirrorMap::hessian(VecRef x) const {
  require_interior(x);
  Mat h = x.array().inverse().matrix().asDiagonal();
  if (kind_ == MapKind::EntropicSimplex) h.array() += 1.0 / (1.0 - x.sum());
  return h;
}

Mat MirrorMap::hessian_inverse(VecRef x) const {
  require_dim(x, "hessian_inverse");
  Mat j = x.asDiagonal();
  if (kind_ == MapKind::EntropicSimplex) j.noalias() -= x * x.transpose();
  return j;
}

Vec MirrorMap::hessian_apply(VecRef x, VecRef v) const {
  require_interior(x);
  require_dim(v, "hessian_apply");
  Vec out = (v.array() / x.array()).matrix();
  if (kind_ == MapKind::EntropicSimplex) out.array() += v.sum() / (1.0 - x.sum());
  return out;
}

Vec MirrorMap::hessian_inverse_apply(VecRef x, VecRef v) const {
  require_dim(x, "hessian_inverse_apply");
  require_dim(v, "hessian_inverse_apply");
  // Sherman-Morrison: (diag(1/x) + 11^T/x_last)^{-1} = diag(x) - x x^T.
  Vec out = (x.array() * v.array()).matrix();
  if (kind_ == MapKind::EntropicSimplex) out -= x * x.dot(v);
  return out;
}

Vec MirrorMap::dual_log_det_drift(VecRef x) const {
  require_dim(x, "dual_log_det_drift");
  if (kind_ == MapKind::PositiveOrthant) return Vec::Ones(dim_);
  return (1.0 - static_cast<double>(dim_ + 1) * x.array()).matrix();
}

Vec MirrorMap::jacobian_derivative_contract(VecRef x, VecRef u, VecRef v) const {
  require_dim(x, "jacobian_derivative_contract");
  if (kind_ == MapKind::PositiveOrthant) {
    // dJ_ab/dy_j = delta_ab delta_aj x_a
    return (u.array() * v.array() * x.array()).matrix();
  }
  // dJ_ab/dy_j = delta_ab J_aj - J_aj x_b - x_a J_bj
  const Vec uv = (u.array() * v.array()).matrix();
  return hessian_inverse_apply(x, uv) - hessian_inverse_apply(x, u) * x.dot(v) -
         hessian_inverse_apply(x, v) * x.dot(u);
}

Vec MirrorMap::jacobian_derivative_contract(VecRef x, const Mat& weights) const {
  require_dim(x, "jacobian_derivative_contract");
  const Vec diag = weights.diagonal();
  if (kind_ == MapKind::PositiveOrthant) return (diag.array() * x.array()).matrix();
  const Vec rows = weights * x;              // sum_b R_ab x_b
  const Vec cols = weights.transpose() * x;  // sum_a R_ab x_a
  return hessian_inverse_apply(x, diag - rows - cols);
}

}  // namespace mirrorcoin
