#include <cmath>
#include <vector>

#include "mirrorcoin/pairwise.hpp"
#include "mirrorcoin/stein.hpp"

namespace mirrorcoin::parallel {

namespace {

using Index = Eigen::Index;

void require_nonempty(const Cloud& c, const char* what) {
  if (c.rows() < 1) throw std::invalid_argument(std::string(what) + ": empty particle cloud");
}

// Rethrows the first exception raised inside an OpenMP region.
class ErrorSlot {
 public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(mirrorcoin_error_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

// out = J(x) v for the two supported maps, without temporaries.
inline void apply_jacobian(MapKind kind, const double* x, const double* v, double* out, Index d) {
  if (kind == MapKind::PositiveOrthant) {
    for (Index k = 0; k < d; ++k) out[k] = x[k] * v[k];
    return;
  }
  double xv = 0.0;
  for (Index k = 0; k < d; ++k) xv += x[k] * v[k];
  for (Index k = 0; k < d; ++k) out[k] = x[k] * (v[k] - xv);
}

// sum_j f(i, j) for every row i, each row summed in index order.
template <typename RowFn>
Cloud row_sums(Index n, Index d, RowFn&& fn) {
  Cloud out = Cloud::Zero(n, d);
  ErrorSlot slot;
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    slot.run([&] { fn(i, out.row(i).data()); });
  }
  slot.rethrow();
  return out;
}

}  // namespace

Cloud msvgd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "msvgd_direction");
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const Index n = y.rows();
  const Index d = y.cols();
  const MapKind kind = mt.map().kind();
  Cloud x(n, d);
  Cloud s(n, d);
  {
    ErrorSlot slot;
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
      slot.run([&] {
        const Vec yj = y.row(j).transpose();
        x.row(j) = mt.map().dual_to_primal(yj).transpose();
        s.row(j) = mt.dual_score(yj).transpose();
      });
    }
    slot.rethrow();
  }
  const double inv_h2 = 1.0 / (h * h);
  const double inv_n = 1.0 / static_cast<double>(n);
  return row_sums(n, d, [&](Index i, double* row) {
    std::vector<double> delta(d), grad(d), jg(d);
    for (Index j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (Index k = 0; k < d; ++k) {
        delta[k] = x(j, k) - x(i, k);
        r2 += delta[k] * delta[k];
      }
      const RadialProfile p = radial_profile(family, r2 * inv_h2);
      const double c = 2.0 * p.df * inv_h2;
      for (Index k = 0; k < d; ++k) grad[k] = c * delta[k];
      apply_jacobian(kind, &x(j, 0), grad.data(), jg.data(), d);
      for (Index k = 0; k < d; ++k) row[k] += p.f * s(j, k) + jg[k];
    }
    for (Index k = 0; k < d; ++k) row[k] *= inv_n;
  });
}

Cloud svgd_direction(const Cloud& x, const ConstrainedTarget& target, KernelFamily family,
                     double h) {
  require_nonempty(x, "svgd_direction");
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const Index n = x.rows();
  const Index d = x.cols();
  Cloud s(n, d);
  {
    ErrorSlot slot;
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < n; ++j) {
      slot.run([&] { s.row(j) = target.primal_score_unchecked(x.row(j).transpose()).transpose(); });
    }
    slot.rethrow();
  }
  const double inv_h2 = 1.0 / (h * h);
  const double inv_n = 1.0 / static_cast<double>(n);
  return row_sums(n, d, [&](Index i, double* row) {
    std::vector<double> delta(d);
    for (Index j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (Index k = 0; k < d; ++k) {
        delta[k] = x(j, k) - x(i, k);
        r2 += delta[k] * delta[k];
      }
      const RadialProfile p = radial_profile(family, r2 * inv_h2);
      const double c = 2.0 * p.df * inv_h2;
      for (Index k = 0; k < d; ++k) row[k] += p.f * s(j, k) + c * delta[k];
    }
    for (Index k = 0; k < d; ++k) row[k] *= inv_n;
  });
}

namespace {

std::vector<SteinPoint> stein_points(const Cloud& y, const MirroredTarget& mt) {
  std::vector<SteinPoint> pts(static_cast<std::size_t>(y.rows()));
  ErrorSlot slot;
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < y.rows(); ++j) {
    slot.run([&] { pts[j] = make_stein_point(mt, y.row(j).transpose()); });
  }
  slot.rethrow();
  return pts;
}

}  // namespace

Cloud mksdd_direction(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "mksdd_direction");
  const Index n = y.rows();
  const auto pts = stein_points(y, mt);
  const double scale = -1.0 / static_cast<double>(n * n);
  return row_sums(n, y.cols(), [&](Index i, double* row) {
    Vec acc = Vec::Zero(y.cols());
    for (Index j = 0; j < n; ++j) acc += stein_grad_second(mt.map(), family, h, pts[j], pts[i]);
    for (Index k = 0; k < y.cols(); ++k) row[k] = scale * acc[k];
  });
}

double ksd_vstat(const Cloud& y, const MirroredTarget& mt, KernelFamily family, double h) {
  require_nonempty(y, "ksd_vstat");
  const Index n = y.rows();
  const auto pts = stein_points(y, mt);
  const Cloud rows = row_sums(n, 1, [&](Index i, double* row) {
    for (Index j = 0; j < n; ++j) row[0] += stein_value(mt.map(), family, h, pts[i], pts[j]);
  });
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) sum += rows(i, 0);
  return sum / static_cast<double>(n * n);
}

Cloud mlawgd_direction(const Cloud& y, const HermiteSpectralKernel& kernel) {
  require_nonempty(y, "mlawgd_direction");
  if (y.cols() != 1) throw Unsupported("the Hermite spectral kernel is one-dimensional");
  const Index n = y.rows();
  return row_sums(n, 1, [&](Index i, double* row) {
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) acc += kernel.grad_first(y(i, 0), y(j, 0));
    row[0] = -acc / static_cast<double>(n);
  });
}

double energy_distance(const Cloud& a, const Cloud& b) {
  require_nonempty(a, "energy_distance");
  require_nonempty(b, "energy_distance");
  if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
  if (detail::energy_swap(a, b)) return energy_distance(b, a);
  auto mean_dist = [](const Cloud& p, const Cloud& q) {
    const Cloud rows = row_sums(p.rows(), 1, [&](Index i, double* row) {
      for (Index j = 0; j < q.rows(); ++j) row[0] += (p.row(i) - q.row(j)).norm();
    });
    double s = 0.0;
    for (Index i = 0; i < p.rows(); ++i) s += rows(i, 0);
    return s / (static_cast<double>(p.rows()) * static_cast<double>(q.rows()));
  };
  return 2.0 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

}  // namespace mirrorcoin::parallel
