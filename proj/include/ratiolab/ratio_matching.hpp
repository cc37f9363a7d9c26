// Direct density-ratio matching objectives: least-squares importance fitting
// (LSIF), KL importance estimation (KLIEP), and the general Bregman-score
// family that contains both and reproduces the f-divergence ratio losses.
//
// All objectives act on positive ratio-model outputs r(x) evaluated on real
// and generated batches.

#pragma once

#include <Eigen/Dense>

#include "ratiolab/f_divergences.hpp"
#include "ratiolab/tape.hpp"

namespace ratiolab {

// 0.5 * mean(r_gen^2) - mean(r_real); quadratic score, minimised in function
// space at r = p/q.
double lsif_loss(const Eigen::ArrayXd& r_real, const Eigen::ArrayXd& r_gen);
ad::Var lsif_loss(ad::Var r_real, ad::Var r_gen);

// mean(-log r_real) + mean(r_gen - 1). Ratio objective only: its
// model-dependent part is linear in r, so dropping the real-data term leaves
// an objective that is unbounded below and cannot train a generator.
double kliep_loss(const Eigen::ArrayXd& r_real, const Eigen::ArrayXd& r_gen);
ad::Var kliep_loss(ad::Var r_real, ad::Var r_gen);

// Bregman score generated by a convex f:
//   ratio objective      mean(r_gen f'(r_gen) - f(r_gen)) - mean(f'(r_real))
//   generator objective  mean(r_gen f'(r_gen))
// The ratio objective coincides with fdiv_ratio_loss(kind, ...) pointwise;
// with kind = squared it equals lsif_loss + 1/2.
double bregman_ratio_loss(FDiv kind, const Eigen::ArrayXd& r_real,
                          const Eigen::ArrayXd& r_gen);
ad::Var bregman_ratio_loss(FDiv kind, ad::Var r_real, ad::Var r_gen);

double bregman_generator_loss(FDiv kind, const Eigen::ArrayXd& r_gen);
ad::Var bregman_generator_loss(FDiv kind, ad::Var r_gen);

// Exact Bregman divergence between two ratio functions on a finite support
// with known denominator weights:
//   sum_i w_i * (f(r_star_i) - f(r_hat_i) - f'(r_hat_i)(r_star_i - r_hat_i)).
// Diagnostic oracle; weights must sum to 1 within 1e-12.
double bregman_divergence_direct(FDiv kind, const Eigen::ArrayXd& r_star,
                                 const Eigen::ArrayXd& r_hat,
                                 const Eigen::ArrayXd& weights);

}  // namespace ratiolab
