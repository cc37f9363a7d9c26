// Deterministic ground-truth integrals for 1-D and 2-D fixture densities.
// Adaptive Simpson on a support box of +/- 10 standard deviations around
// every component mean; designed for smooth Gaussian-family integrands.

#pragma once

#include <Eigen/Dense>

#include <functional>

#include "ratiolab/prob.hpp"

namespace ratiolab {

// Adaptive Simpson on [a, b] with absolute tolerance tol.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol = 1e-10);

// Tensor-product adaptive Simpson over [ax, bx] x [ay, by].
double integrate_2d(const std::function<double(double, double)>& f, double ax,
                    double bx, double ay, double by, double tol = 1e-8);

// Bounding box covering every component mean +/- 10 sigma per axis.
struct SupportBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};
SupportBox support_box(const DistSpec& spec);
SupportBox support_box(const DistSpec& a, const DistSpec& b);

// Integral of exp(log_density) over the support box; should be ~1.
double quadrature_mass(const DistSpec& spec, double tol = 1e-9);

// KL[p || q] by quadrature; declared ground truth for mixture pairs,
// tolerance 1e-6. Supports dim 1 and 2.
double quadrature_kl(const DistSpec& p, const DistSpec& q, double tol = 1e-8);

// E_q[f(p/q)] for a pointwise f on the ratio, by quadrature. Used as the
// direct-divergence oracle. Supports dim 1 and 2.
double quadrature_fdiv(const DistSpec& p, const DistSpec& q,
                       const std::function<double(double)>& f, double tol = 1e-8);

}  // namespace ratiolab
