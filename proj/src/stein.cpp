#include "mirrorcoin/stein.hpp"

namespace mirrorcoin {

SteinPoint make_stein_point(const MirroredTarget& mt, VecRef y) {
  SteinPoint p;
  p.x = mt.map().dual_to_primal(y);
  p.jac = mt.map().hessian_inverse(p.x);
  p.score = mt.dual_score(y);
  p.score_jac = mt.dual_score_jacobian(y);
  return p;
}

namespace {

// Base kernel on delta = x - x': k, gradient in x, and the mixed Hessian
// grad_x grad_{x'}^T k = a I - b delta delta^T.
struct PairGeometry {
  Vec delta;
  RadialProfile prof;
  double h2;
  double k;
  Vec grad_x;
  double a, b;
};

PairGeometry pair_geometry(KernelFamily family, double h, const SteinPoint& p, const SteinPoint& q) {
  PairGeometry g;
  g.delta = p.x - q.x;
  g.h2 = h * h;
  g.prof = radial_profile(family, g.delta.squaredNorm() / g.h2);
  g.k = g.prof.f;
  g.grad_x = g.delta * (2.0 * g.prof.df / g.h2);
  g.a = -2.0 * g.prof.df / g.h2;
  g.b = 4.0 * g.prof.d2f / (g.h2 * g.h2);
  return g;
}

}  // namespace

double stein_value(const MirrorMap&, KernelFamily family, double h, const SteinPoint& p,
                   const SteinPoint& q) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const PairGeometry g = pair_geometry(family, h, p, q);
  const Vec grad_y = p.jac * g.grad_x;         // grad_y k_phi
  const Vec grad_y_other = -(q.jac * g.grad_x);  // grad_{y'} k_phi
  const Vec jd = p.jac * g.delta;
  const Vec jd_other = q.jac * g.delta;
  const double trace = g.a * (p.jac.cwiseProduct(q.jac)).sum() - g.b * jd.dot(jd_other);
  return g.k * p.score.dot(q.score) + p.score.dot(grad_y_other) + grad_y.dot(q.score) + trace;
}

Vec stein_grad_second(const MirrorMap& map, KernelFamily family, double h, const SteinPoint& p,
                      const SteinPoint& q) {
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const PairGeometry g = pair_geometry(family, h, p, q);
  const Vec& s = p.score;
  const Vec& s2 = q.score;
  const Mat& jp = p.jac;
  const Mat& jq = q.jac;
  const Vec g2 = -g.grad_x;  // grad_{x'} k
  const Vec& delta = g.delta;
  auto apply_m = [&](const Vec& w) -> Vec { return g.a * w - g.b * delta * delta.dot(w); };

  // s^T k s'
  Vec out = (jq * g2) * s.dot(s2) + g.k * (q.score_jac.transpose() * s);
  // s^T J' g'
  out += map.jacobian_derivative_contract(q.x, s, g2) - jq * apply_m(jq * s);
  // (J g)^T s'
  const Vec jg = jp * g.grad_x;
  out += jq * apply_m(jp * s2) + q.score_jac.transpose() * jg;
  // tr(J M J'): third derivative of the base kernel contracted with Q = J' J,
  // then the derivative of J' itself.
  const Vec jd = jp * delta;
  const Vec jd_other = jq * delta;
  const double tr_q = jp.cwiseProduct(jq).sum();
  const double dqd = jd_other.dot(jd);
  const double c2 = 4.0 * g.prof.d2f / (g.h2 * g.h2);
  const double c3 = 8.0 * g.prof.d3f / (g.h2 * g.h2 * g.h2);
  const Vec v = c2 * (delta * tr_q + jq * jd + jp * jd_other) + c3 * dqd * delta;
  out += jq * v;
  out += g.a * map.jacobian_derivative_contract(q.x, jp) -
         g.b * map.jacobian_derivative_contract(q.x, delta, jd);
  return out;
}

double stein_kernel_eval(const MirroredTarget& mt, KernelFamily family, double h, VecRef y,
                         VecRef y_other) {
  return stein_value(mt.map(), family, h, make_stein_point(mt, y), make_stein_point(mt, y_other));
}

}  // namespace mirrorcoin
