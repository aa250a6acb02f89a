#include "mirrorcoin/spectral.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mirrorcoin {

namespace {

// h_0..h_n at x via h_{i+1} = (x h_i - sqrt(i) h_{i-1}) / sqrt(i+1).
std::vector<double> normalized_hermite(double x, int n) {
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = x;
  for (int i = 1; i < n; ++i) {
    h[i + 1] = (x * h[i] - std::sqrt(static_cast<double>(i)) * h[i - 1]) /
               std::sqrt(static_cast<double>(i + 1));
  }
  return h;
}

}  // namespace

HermiteSpectralKernel::HermiteSpectralKernel(int order) : order_(order) {
  if (order_ < 1) throw std::invalid_argument("Hermite kernel order must be at least 1");
}

double HermiteSpectralKernel::value(double x, double y) const {
  const auto hx = normalized_hermite(x, order_);
  const auto hy = normalized_hermite(y, order_);
  double sum = 0.0;
  for (int i = 1; i <= order_; ++i) sum += hx[i] * hy[i] / i;
  return sum;
}

double HermiteSpectralKernel::grad_first(double x, double y) const {
  const auto hx = normalized_hermite(x, order_);
  const auto hy = normalized_hermite(y, order_);
  double sum = 0.0;
  for (int i = 1; i <= order_; ++i) {
    sum += hx[i - 1] * hy[i] / std::sqrt(static_cast<double>(i));
  }
  return sum;
}

}  // namespace mirrorcoin
