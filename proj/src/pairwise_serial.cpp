#include <cmath>

#include "mirrorcoin/pairwise.hpp"
#include "mirrorcoin/stein.hpp"

namespace mirrorcoin {

Cloud dual_to_primal_rows(const MirrorMap& map, const Cloud& y) {
  Cloud x(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    x.row(i) = map.dual_to_primal(y.row(i).transpose()).transpose();
  }
  return x;
}

namespace detail {

bool energy_swap(const Cloud& a, const Cloud& b) {
  if (a.rows() != b.rows()) return a.rows() > b.rows();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a.data()[i] != b.data()[i]) return a.data()[i] > b.data()[i];
  }
  return false;
}

}  // namespace detail

namespace serial {

namespace {

void require_nonempty(const Cloud& c, const char* what) {
  if (c.rows() < 1) throw std::invalid_argument(std::string(what) + ": empty particle cloud");
}

}  // namespace

Cloud msvgd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "msvgd_direction");
  const Eigen::Index n = y.rows();
  Cloud out = Cloud::Zero(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec acc = Vec::Zero(y.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec yj = y.row(j).transpose();
      const auto kv = mirrored_eval_grad(family, h, mt.map(), yj, y.row(i).transpose());
      acc += kv.value * mt.dual_score(yj) + kv.grad_y;
    }
    out.row(i) = acc.transpose() / static_cast<double>(n);
  }
  return out;
}

Cloud svgd_direction(const Cloud& x, const ConstrainedTarget& target, KernelFamily family,
                     double h) {
  require_nonempty(x, "svgd_direction");
  const Eigen::Index n = x.rows();
  Cloud out = Cloud::Zero(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec acc = Vec::Zero(x.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec xj = x.row(j).transpose();
      const auto kv = base_eval_grad(family, h, xj, x.row(i).transpose());
      acc += kv.value * target.primal_score_unchecked(xj) + kv.grad_x;
    }
    out.row(i) = acc.transpose() / static_cast<double>(n);
  }
  return out;
}

Cloud mksdd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "mksdd_direction");
  const Eigen::Index n = y.rows();
  Cloud out = Cloud::Zero(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const SteinPoint pi = make_stein_point(mt, y.row(i).transpose());
    Vec acc = Vec::Zero(y.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const SteinPoint pj = make_stein_point(mt, y.row(j).transpose());
      acc += stein_grad_second(mt.map(), family, h, pj, pi);
    }
    out.row(i) = -acc.transpose() / static_cast<double>(n * n);
  }
  return out;
}

double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "ksd_vstat");
  const Eigen::Index n = y.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sum += stein_kernel_eval(mt, family, h, y.row(i).transpose(), y.row(j).transpose());
    }
  }
  return sum / static_cast<double>(n * n);
}

Cloud mlawgd_direction(const Cloud& y, const HermiteSpectralKernel& kernel) {
  require_nonempty(y, "mlawgd_direction");
  if (y.cols() != 1) throw Unsupported("the Hermite spectral kernel is one-dimensional");
  const Eigen::Index n = y.rows();
  Cloud out(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += kernel.grad_first(y(i, 0), y(j, 0));
    out(i, 0) = -acc / static_cast<double>(n);
  }
  return out;
}

double energy_distance(const Cloud& a, const Cloud& b) {
  require_nonempty(a, "energy_distance");
  require_nonempty(b, "energy_distance");
  if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  if (detail::energy_swap(a, b)) return energy_distance(b, a);
  auto mean_dist = [](const Cloud& p, const Cloud& q) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < q.rows(); ++j) s += (p.row(i) - q.row(j)).norm();
    }
    return s / (static_cast<double>(p.rows()) * static_cast<double>(q.rows()));
  };
  return 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

}  // namespace serial
}  // namespace mirrorcoin
