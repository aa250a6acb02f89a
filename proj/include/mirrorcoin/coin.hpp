#pragma once

#include "mirrorcoin/types.hpp"

namespace mirrorcoin {

enum class CoinGuard { None, Max100L };

/// Krichevsky-Trofimov coin betting, one bettor per particle (row).
///
/// Positions are indexed from t = 1 with y_1 = y_0. Each call to step()
/// receives the outcome c_t observed at the current position y_t and
/// returns
///   y_{t+1} = y_0 + (sum_{s<=t} c_s) / (t+1) * (1 + sum_{s<=t} <c_s, y_s - y_0>).
/// Outcomes are assumed bounded by one in norm; `scale` divides them first.
class KtCoin {
 public:
  explicit KtCoin(Cloud y0, double scale = 1.0);

  const Cloud& position() const { return y_; }
  const Cloud& origin() const { return y0_; }
  long t() const { return t_; }

  const Cloud& step(const Cloud& outcome);

 private:
  Cloud y0_;
  Cloud y_;
  Cloud sum_c_;
  Vec reward_;  // sum_s <c_s, y_s - y_0> per particle
  double scale_;
  long t_ = 1;
};

/// Coordinate-wise coin betting with an adaptively estimated outcome scale.
///
/// Per particle i and coordinate j, on each new outcome c:
///   L <- max(L, |c|), G <- G + |c|, R <- max(R + c (y - y0), 0)
///   y <- y0 + (sum c) / (G + L) * (1 + R / L)
/// With Max100L the denominator is max(G + L, 100 L). Coordinates that have
/// only seen zero outcomes (L = 0) stay at y0.
class AdaptiveCoin {
 public:
  explicit AdaptiveCoin(Cloud y0, CoinGuard guard = CoinGuard::None);

  const Cloud& position() const { return y_; }
  const Cloud& origin() const { return y0_; }
  long steps() const { return steps_; }

  const Cloud& max_scale() const { return max_abs_; }
  const Cloud& abs_sum() const { return abs_sum_; }
  const Cloud& reward() const { return reward_; }

  const Cloud& step(const Cloud& outcome);

 private:
  Cloud y0_;
  Cloud y_;
  Cloud sum_c_;
  Cloud max_abs_;
  Cloud abs_sum_;
  Cloud reward_;
  CoinGuard guard_;
  long steps_ = 0;
};

}  // namespace mirrorcoin
