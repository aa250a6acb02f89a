#include "mirrorcoin/coin.hpp"

#include <algorithm>
#include <cmath>

namespace mirrorcoin {

namespace {

void require_shape(const Cloud& outcome, const Cloud& ref) {
  if (outcome.rows() != ref.rows() || outcome.cols() != ref.cols()) {
    throw std::invalid_argument("coin outcome shape does not match the particle cloud");
  }
}

}  // namespace

KtCoin::KtCoin(Cloud y0, double scale)
    : y0_(std::move(y0)),
      y_(y0_),
      sum_c_(Cloud::Zero(y0_.rows(), y0_.cols())),
      reward_(Vec::Zero(y0_.rows())),
      scale_(scale) {
  if (!(scale_ > 0.0)) throw std::invalid_argument("coin scale must be positive");
}

const Cloud& KtCoin::step(const Cloud& outcome) {
  require_shape(outcome, y0_);
  const Cloud c = outcome / scale_;
  // Reward uses the position at which the outcome was observed.
  reward_ += (c.array() * (y_ - y0_).array()).rowwise().sum().matrix();
  sum_c_ += c;
  ++t_;
  const double inv_t = 1.0 / static_cast<double>(t_);
  for (Eigen::Index i = 0; i < y_.rows(); ++i) {
    y_.row(i) = y0_.row(i) + sum_c_.row(i) * (inv_t * (1.0 + reward_[i]));
  }
  return y_;
}

AdaptiveCoin::AdaptiveCoin(Cloud y0, CoinGuard guard)
    : y0_(std::move(y0)),
      y_(y0_),
      sum_c_(Cloud::Zero(y0_.rows(), y0_.cols())),
      max_abs_(sum_c_),
      abs_sum_(sum_c_),
      reward_(sum_c_),
      guard_(guard) {}

const Cloud& AdaptiveCoin::step(const Cloud& outcome) {
  require_shape(outcome, y0_);
  for (Eigen::Index i = 0; i < y_.rows(); ++i) {
    for (Eigen::Index j = 0; j < y_.cols(); ++j) {
      const double c = outcome(i, j);
      const double a = std::abs(c);
      double& lmax = max_abs_(i, j);
      lmax = std::max(lmax, a);
      abs_sum_(i, j) += a;
      reward_(i, j) = std::max(reward_(i, j) + c * (y_(i, j) - y0_(i, j)), 0.0);
      sum_c_(i, j) += c;
      if (lmax == 0.0) {
        y_(i, j) = y0_(i, j);
        continue;
      }
      double denom = abs_sum_(i, j) + lmax;
      if (guard_ == CoinGuard::Max100L) denom = std::max(denom, 100.0 * lmax);
      y_(i, j) = y0_(i, j) + sum_c_(i, j) / denom * (1.0 + reward_(i, j) / lmax);
    }
  }
  ++steps_;
  return y_;
}

}  // namespace mirrorcoin
