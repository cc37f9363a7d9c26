// f-divergence machinery: generator functions f, their derivatives f', convex
// conjugates f*, the variational lower bound built from them, and the
// ratio/generator losses obtained by plugging a ratio model into the bound at
// the optimal test function t = f'(r).
//
// Conventions: f is convex on u > 0 with f(1) = 0 for every family except
// "gan", whose generator function is kept in its raw form
// u log u - (u+1) log(u+1) so that the induced losses match the saturating
// adversarial game exactly (its value at u = 1 is -log 4).

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ratiolab/tape.hpp"

namespace ratiolab {

enum class FDiv { kl, reverse_kl, gan, pearson_chi2, squared };

const std::vector<FDiv>& all_fdivs();
const std::string& fdiv_name(FDiv kind);
FDiv fdiv_by_name(const std::string& name);

// f(u); domain u > 0
double f_value(FDiv kind, double u);
Eigen::ArrayXd f_value(FDiv kind, const Eigen::ArrayXd& u);
ad::Var f_value(FDiv kind, ad::Var u);

// f'(u); domain u > 0
double f_prime(FDiv kind, double u);
Eigen::ArrayXd f_prime(FDiv kind, const Eigen::ArrayXd& u);
ad::Var f_prime(FDiv kind, ad::Var u);

// Convex conjugate f*(t) = sup_u (t u - f(u)). Finite on all of R for
// kl / pearson_chi2 / squared and on t < 0 for reverse_kl / gan; arguments
// outside the finite domain are rejected.
double f_conj(FDiv kind, double t);
Eigen::ArrayXd f_conj(FDiv kind, const Eigen::ArrayXd& t);
ad::Var f_conj(FDiv kind, ad::Var t);

// True for the kinds whose conjugate is finite only on t < 0.
bool conj_needs_negative(FDiv kind);

// Lower bound on D_f(p || q) for any test function t evaluated on samples:
//   mean(t(X_p)) - mean(f*(t(X_q))).
// Tight at t = f'(p/q).
double variational_bound(FDiv kind, const Eigen::ArrayXd& t_real,
                         const Eigen::ArrayXd& t_gen);
ad::Var variational_bound(FDiv kind, ad::Var t_real, ad::Var t_gen);

// Losses induced by parameterising the test function through a ratio model
// r(x): substituting t = f'(r) into the bound and negating gives the ratio
// objective
//   mean(-f'(r_real)) + mean(f*(f'(r_gen)))
// and the generator objective that keeps only the model-dependent term:
//   mean(-f*(f'(r_gen))).
double fdiv_ratio_loss(FDiv kind, const Eigen::ArrayXd& r_real,
                       const Eigen::ArrayXd& r_gen);
ad::Var fdiv_ratio_loss(FDiv kind, ad::Var r_real, ad::Var r_gen);

double fdiv_generator_loss(FDiv kind, const Eigen::ArrayXd& r_gen);
ad::Var fdiv_generator_loss(FDiv kind, ad::Var r_gen);

}  // namespace ratiolab
