#include "ratiolab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ratiolab {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                    double ay, double by, double tol) {
  auto inner = [&](double x) {
    return integrate_1d([&](double y) { return f(x, y); }, ay, by, tol * 0.1);
  };
  return integrate_1d(inner, ax, bx, tol);
}

SupportBox support_box(const DistSpec& spec) {
  const int d = spec_dim(spec);
  SupportBox box{Eigen::VectorXd::Constant(d, 1e300),
                 Eigen::VectorXd::Constant(d, -1e300)};
  auto widen = [&](const GaussianSpec& g) {
    for (int j = 0; j < d; ++j) {
      const double sd = std::sqrt(g.var[j]);
      box.lo[j] = std::min(box.lo[j], g.mean[j] - 10.0 * sd);
      box.hi[j] = std::max(box.hi[j], g.mean[j] + 10.0 * sd);
    }
  };
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    widen(*g);
  } else {
    for (const auto& c : std::get<MixtureSpec>(spec).components) widen(c.gaussian);
  }
  return box;
}

SupportBox support_box(const DistSpec& a, const DistSpec& b) {
  SupportBox ba = support_box(a);
  const SupportBox bb = support_box(b);
  ba.lo = ba.lo.cwiseMin(bb.lo);
  ba.hi = ba.hi.cwiseMax(bb.hi);
  return ba;
}

namespace {

double integrate_over_box(const DistSpec& p, const DistSpec& q, const SupportBox& box,
                          const std::function<double(double, double)>& integrand_of_logs,
                          double tol) {
  // integrand_of_logs receives (log p(x), log q(x)).
  const int d = spec_dim(p);
  if (d == 1) {
    return integrate_1d(
        [&](double x) {
          Eigen::VectorXd v(1);
          v << x;
          return integrand_of_logs(log_density(p, v), log_density(q, v));
        },
        box.lo[0], box.hi[0], tol);
  }
  if (d == 2) {
    return integrate_2d(
        [&](double x, double y) {
          Eigen::VectorXd v(2);
          v << x, y;
          return integrand_of_logs(log_density(p, v), log_density(q, v));
        },
        box.lo[0], box.hi[0], box.lo[1], box.hi[1], tol);
  }
  throw std::invalid_argument("quadrature oracle supports dim 1 and 2 only");
}

}  // namespace

double quadrature_mass(const DistSpec& spec, double tol) {
  const SupportBox box = support_box(spec);
  return integrate_over_box(
      spec, spec, box, [](double lp, double) { return std::exp(lp); }, tol);
}

double quadrature_kl(const DistSpec& p, const DistSpec& q, double tol) {
  const SupportBox box = support_box(p, q);
  return integrate_over_box(
      p, q, box,
      [](double lp, double lq) {
        const double w = std::exp(lp);
        return w == 0.0 ? 0.0 : w * (lp - lq);
      },
      tol);
}

double quadrature_fdiv(const DistSpec& p, const DistSpec& q,
                       const std::function<double(double)>& f, double tol) {
  const SupportBox box = support_box(p, q);
  return integrate_over_box(
      p, q, box,
      [&](double lp, double lq) {
        const double wq = std::exp(lq);
        return wq == 0.0 ? 0.0 : wq * f(std::exp(lp - lq));
      },
      tol);
}

}  // namespace ratiolab
