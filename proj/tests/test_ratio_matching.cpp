#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "ratiolab/prob.hpp"
#include "ratiolab/ratio_matching.hpp"

using namespace ratiolab;

namespace {

Eigen::ArrayXd constant(Eigen::Index n, double v) { return Eigen::ArrayXd::Constant(n, v); }

// Minimise a convex scalar function on (lo, hi) by ternary search.
double ternary_min(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return 0.5 * (lo + hi);
}

// Two-outcome support with masses p = (0.6, 0.4) and q = (0.3, 0.7), expressed
// as replicated batches so empirical means equal exact expectations: the real
// batch holds 6 + 4 copies of the two model values, the generated batch 3 + 7.
Eigen::ArrayXd real_batch(double r1, double r2) {
  Eigen::ArrayXd out(10);
  out << r1, r1, r1, r1, r1, r1, r2, r2, r2, r2;
  return out;
}

Eigen::ArrayXd gen_batch(double r1, double r2) {
  Eigen::ArrayXd out(10);
  out << r1, r1, r1, r2, r2, r2, r2, r2, r2, r2;
  return out;
}

Eigen::ArrayXd log_uniform(RngState& rng, Eigen::Index n, double lo, double hi) {
  Eigen::ArrayXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.next_unit());
  }
  return r;
}

}  // namespace

TEST_CASE("lsif loss closed forms") {
  const Eigen::ArrayXd ones = constant(4, 1.0);
  CHECK(lsif_loss(ones, ones) == doctest::Approx(-0.5).epsilon(1e-12));
  const Eigen::ArrayXd tiny = constant(4, 1e-12);
  CHECK(std::abs(lsif_loss(tiny, tiny)) < 1e-11);
  // 0.5 * mean(r_gen^2) - mean(r_real) by hand on asymmetric batches.
  Eigen::ArrayXd rr(2), rg(3);
  rr << 2.0, 4.0;
  rg << 1.0, 2.0, 3.0;
  CHECK(lsif_loss(rr, rg) == doctest::Approx(0.5 * (14.0 / 3.0) - 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(lsif_loss(Eigen::ArrayXd(), ones), std::invalid_argument);
}

TEST_CASE("kliep loss closed forms and positivity guard") {
  const Eigen::ArrayXd ones = constant(4, 1.0);
  CHECK(kliep_loss(ones, ones) == doctest::Approx(0.0).epsilon(1e-14));
  const Eigen::ArrayXd es = constant(4, std::exp(1.0));
  CHECK(kliep_loss(es, ones) == doctest::Approx(-1.0).epsilon(1e-12));
  Eigen::ArrayXd bad = ones;
  bad[2] = 0.0;
  CHECK_THROWS_AS(kliep_loss(bad, ones), std::domain_error);
  CHECK_THROWS_AS(kliep_loss(ones, Eigen::ArrayXd()), std::invalid_argument);
}

TEST_CASE("lsif and kliep population objectives are minimised at r = p/q") {
  // Independent numerical minimisation per support point; the objectives are
  // separable, so the argmin in one coordinate is unaffected by the other.
  const double r_other = 0.9;
  const std::function<double(const Eigen::ArrayXd&, const Eigen::ArrayXd&)> losses[] = {
      [](const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) { return lsif_loss(a, b); },
      [](const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) { return kliep_loss(a, b); },
  };
  for (const auto& loss : losses) {
    const double r1 = ternary_min(
        [&](double v) { return loss(real_batch(v, r_other), gen_batch(v, r_other)); }, 0.05,
        8.0);
    const double r2 = ternary_min(
        [&](double v) { return loss(real_batch(r_other, v), gen_batch(r_other, v)); }, 0.05,
        8.0);
    CHECK(r1 == doctest::Approx(0.6 / 0.3).epsilon(1e-6));
    CHECK(r2 == doctest::Approx(0.4 / 0.7).epsilon(1e-6));
  }
}

TEST_CASE("every bregman ratio objective is minimised at r = p/q") {
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    const double r_other = 1.3;
    const double r1 = ternary_min(
        [&](double v) {
          return bregman_ratio_loss(kind, real_batch(v, r_other), gen_batch(v, r_other));
        },
        0.05, 8.0);
    CHECK(r1 == doctest::Approx(0.6 / 0.3).epsilon(1e-6));
  }
}

TEST_CASE("bregman ratio loss at r = 1 equals minus f(1)") {
  const Eigen::ArrayXd ones = constant(5, 1.0);
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    const double expected = kind == FDiv::gan ? std::log(4.0) : 0.0;
    CHECK(bregman_ratio_loss(kind, ones, ones) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(fdiv_ratio_loss(kind, ones, ones) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("bregman generator loss closed forms at r = 1") {
  const Eigen::ArrayXd ones = constant(5, 1.0);
  CHECK(bregman_generator_loss(FDiv::kl, ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bregman_generator_loss(FDiv::pearson_chi2, ones) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bregman_generator_loss(FDiv::gan, ones) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(bregman_generator_loss(FDiv::kl, Eigen::ArrayXd()), std::invalid_argument);
}

TEST_CASE("bregman ratio losses agree with the f-divergence ratio losses") {
  RngState rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::ArrayXd rr = log_uniform(rng, 7, 0.2, 5.0);
    const Eigen::ArrayXd rg = log_uniform(rng, 9, 0.2, 5.0);
    for (FDiv kind : all_fdivs()) {
      CAPTURE(fdiv_name(kind));
      CHECK(bregman_ratio_loss(kind, rr, rg) ==
            doctest::Approx(fdiv_ratio_loss(kind, rr, rg)).epsilon(1e-12));
    }
    CHECK(bregman_ratio_loss(FDiv::squared, rr, rg) ==
          doctest::Approx(lsif_loss(rr, rg) + 0.5).epsilon(1e-12));
  }
}

TEST_CASE("direct bregman divergence validates its inputs") {
  Eigen::ArrayXd r(2), w(2);
  r << 1.0, 2.0;
  w << 0.5, 0.5;
  CHECK_THROWS_AS(bregman_divergence_direct(FDiv::kl, r, Eigen::ArrayXd::Ones(3), w),
                  std::invalid_argument);
  Eigen::ArrayXd bad_w(2);
  bad_w << 0.5, 0.4;
  CHECK_THROWS_AS(bregman_divergence_direct(FDiv::kl, r, r, bad_w), std::invalid_argument);
}

TEST_CASE("direct bregman divergence is zero at equality and otherwise positive") {
  RngState rng(6161);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::ArrayXd r_star = log_uniform(rng, 6, 0.2, 5.0);
    const Eigen::ArrayXd r_hat = log_uniform(rng, 6, 0.2, 5.0);
    Eigen::ArrayXd w = log_uniform(rng, 6, 0.5, 2.0);
    w /= w.sum();
    for (FDiv kind : all_fdivs()) {
      CAPTURE(fdiv_name(kind));
      CHECK(bregman_divergence_direct(kind, r_star, r_star, w) == 0.0);
      CHECK(bregman_divergence_direct(kind, r_star, r_hat, w) > -1e-15);
    }
  }
}

TEST_CASE("direct bregman divergence with the squared generator is half the L2 error") {
  Eigen::ArrayXd r_star(3), r_hat(3), w(3);
  r_star << 2.0, 0.5, 1.25;
  r_hat << 1.0, 1.0, 1.0;
  w << 0.2, 0.3, 0.5;
  const double expected = 0.5 * (w * (r_star - r_hat).square()).sum();
  CHECK(bregman_divergence_direct(FDiv::squared, r_star, r_hat, w) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("bregman divergence decomposes as divergence plus excess ratio loss") {
  // On a known support the gap between a candidate ratio model and the true
  // ratio satisfies  B_f(r*, r_hat) = D_f(p || q) + L_ratio(r_hat)  where
  // L_ratio is the exact-expectation bregman ratio objective; at the optimum
  // the objective therefore bottoms out at -D_f.
  Eigen::ArrayXd p(2), q(2);
  p << 0.6, 0.4;
  q << 0.3, 0.7;
  const Eigen::ArrayXd r_star = p / q;
  Eigen::ArrayXd r_hat(2);
  r_hat << 1.7, 0.9;
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    const double direct = bregman_divergence_direct(kind, r_star, r_hat, q);
    const double divergence = (q * f_value(kind, r_star)).sum();
    const double excess = bregman_ratio_loss(kind, real_batch(r_hat[0], r_hat[1]),
                                             gen_batch(r_hat[0], r_hat[1]));
    CHECK(direct == doctest::Approx(divergence + excess).epsilon(1e-9));
    CHECK(bregman_divergence_direct(kind, r_star, r_star, q) ==
          doctest::Approx(divergence + bregman_ratio_loss(kind, real_batch(r_star[0], r_star[1]),
                                                          gen_batch(r_star[0], r_star[1])))
              .epsilon(1e-9));
  }
}

TEST_CASE("tape overloads match the array forms and expose exact gradients") {
  RngState rng(7272);
  const Eigen::ArrayXd rr = log_uniform(rng, 5, 0.3, 4.0);
  const Eigen::ArrayXd rg = log_uniform(rng, 5, 0.3, 4.0);
  ad::Tape tape;
  ad::Var vr = tape.leaf(rr.matrix());
  ad::Var vg = tape.leaf(rg.matrix());

  ad::Var l1 = lsif_loss(vr, vg);
  CHECK(l1.scalar() == doctest::Approx(lsif_loss(rr, rg)).epsilon(1e-14));
  tape.backward(l1);
  // d/dr_real = -1/n, d/dr_gen = r_gen/m.
  CHECK((tape.grad(vr).array() + 1.0 / 5.0).abs().maxCoeff() < 1e-14);
  CHECK((tape.grad(vg).array() - rg / 5.0).abs().maxCoeff() < 1e-14);

  ad::Var l2 = kliep_loss(vr, vg);
  CHECK(l2.scalar() == doctest::Approx(kliep_loss(rr, rg)).epsilon(1e-14));
  tape.backward(l2);
  CHECK((tape.grad(vr).array() + 1.0 / (5.0 * rr)).abs().maxCoeff() < 1e-14);
  CHECK((tape.grad(vg).array() - 0.2).abs().maxCoeff() < 1e-14);

  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    ad::Var lb = bregman_ratio_loss(kind, vr, vg);
    CHECK(lb.scalar() == doctest::Approx(bregman_ratio_loss(kind, rr, rg)).epsilon(1e-13));
    ad::Var lg = bregman_generator_loss(kind, vg);
    CHECK(lg.scalar() == doctest::Approx(bregman_generator_loss(kind, rg)).epsilon(1e-13));
  }
}
