#pragma once

namespace mirrorcoin {

/// Truncated spectral kernel inverting the Langevin generator of a 1-D
/// standard Gaussian:
///   k(x, y) = sum_{i=1..K} h_i(x) h_i(y) / i,   h_i = He_i / sqrt(i!)
/// where He_i are the probabilists' Hermite polynomials.
class HermiteSpectralKernel {
 public:
  explicit HermiteSpectralKernel(int order = 30);

  int order() const { return order_; }
  double value(double x, double y) const;
  /// d/dx k(x, y), using h_i' = sqrt(i) h_{i-1}.
  double grad_first(double x, double y) const;

 private:
  int order_;
};

}  // namespace mirrorcoin
