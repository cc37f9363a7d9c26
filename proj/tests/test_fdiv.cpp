#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "ratiolab/f_divergences.hpp"
#include "ratiolab/nets.hpp"
#include "ratiolab/prob.hpp"
#include "ratiolab/scoring_rules.hpp"

using namespace ratiolab;

namespace {

Eigen::ArrayXd log_uniform(RngState& rng, Eigen::Index n, double lo, double hi) {
  Eigen::ArrayXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.next_unit());
  }
  return r;
}

// D_f[p || q] on a finite support: sum q * f(p/q).
double discrete_fdiv(FDiv kind, const Eigen::ArrayXd& p, const Eigen::ArrayXd& q) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) total += q[i] * f_value(kind, p[i] / q[i]);
  return total;
}

// Exact population variational bound on a finite support.
double discrete_bound(FDiv kind, const Eigen::ArrayXd& p, const Eigen::ArrayXd& q,
                      const Eigen::ArrayXd& t) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    total += p[i] * t[i] - q[i] * f_conj(kind, t[i]);
  }
  return total;
}

}  // namespace

TEST_CASE("divergence names resolve both ways") {
  CHECK(all_fdivs().size() == 5);
  for (FDiv kind : all_fdivs()) {
    CHECK(fdiv_by_name(fdiv_name(kind)) == kind);
  }
  CHECK_THROWS_AS(fdiv_by_name("hellinger"), std::invalid_argument);
}

TEST_CASE("generator values vanish at one except for the unshifted gan form") {
  CHECK(f_value(FDiv::kl, 1.0) == 0.0);
  CHECK(f_value(FDiv::reverse_kl, 1.0) == 0.0);
  CHECK(f_value(FDiv::pearson_chi2, 1.0) == 0.0);
  CHECK(f_value(FDiv::squared, 1.0) == 0.0);
  // the adversarial form u log u - (u+1) log(u+1) keeps its native offset,
  // which is what makes its ratio loss line up with the balanced
  // discrimination loss without rescaling
  CHECK(f_value(FDiv::gan, 1.0) == doctest::Approx(-std::log(4.0)).epsilon(1e-15));
}

TEST_CASE("derivative spot checks match hand calculations") {
  CHECK(f_prime(FDiv::kl, 1.0) == doctest::Approx(1.0));
  CHECK(f_prime(FDiv::gan, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(f_prime(FDiv::pearson_chi2, 2.0) == doctest::Approx(2.0));
  CHECK(f_prime(FDiv::reverse_kl, 2.0) == doctest::Approx(-0.5));
  CHECK(f_prime(FDiv::squared, 3.0) == doctest::Approx(2.0));
}

TEST_CASE("conjugate spot checks match hand calculations") {
  // quadratic conjugate: t^2/4 + t at t=2 -> 3, equal to r f' - f at r=2
  CHECK(f_conj(FDiv::pearson_chi2, 2.0) == doctest::Approx(3.0));
  CHECK(2.0 * f_prime(FDiv::pearson_chi2, 2.0) - f_value(FDiv::pearson_chi2, 2.0) ==
        doctest::Approx(3.0));
  // exp conjugate: e^{t-1} at t=1 -> 1
  CHECK(f_conj(FDiv::kl, 1.0) == doctest::Approx(1.0));
  CHECK(f_conj(FDiv::squared, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("conjugates with restricted domains reject invalid arguments") {
  CHECK_THROWS_AS(f_conj(FDiv::reverse_kl, 0.0), std::domain_error);
  CHECK_THROWS_AS(f_conj(FDiv::gan, 0.1), std::domain_error);
  CHECK_NOTHROW(f_conj(FDiv::reverse_kl, -0.5));
  CHECK_NOTHROW(f_conj(FDiv::gan, -0.5));
  // unrestricted conjugates accept the whole line
  CHECK_NOTHROW(f_conj(FDiv::kl, -100.0));
  CHECK_NOTHROW(f_conj(FDiv::pearson_chi2, 100.0));
}

TEST_CASE("non-positive ratios are rejected everywhere") {
  Eigen::ArrayXd bad(2);
  bad << 1.0, 0.0;
  const Eigen::ArrayXd good = Eigen::ArrayXd::Constant(2, 1.0);
  CHECK_THROWS_AS(f_value(FDiv::kl, 0.0), std::domain_error);
  CHECK_THROWS_AS(f_prime(FDiv::kl, -1.0), std::domain_error);
  CHECK_THROWS_AS(fdiv_ratio_loss(FDiv::kl, bad, good), std::domain_error);
  CHECK_THROWS_AS(fdiv_generator_loss(FDiv::kl, bad), std::domain_error);
}

TEST_CASE("each generator function is convex on a log-spaced grid") {
  const Eigen::ArrayXd grid =
      Eigen::ArrayXd::LinSpaced(200, std::log(1e-2), std::log(1e2)).exp();
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    for (Eigen::Index i = 0; i + 2 < grid.size(); i += 2) {
      const double a = grid[i], b = grid[i + 2];
      const double mid = 0.5 * (a + b);
      CHECK(f_value(kind, mid) <= 0.5 * (f_value(kind, a) + f_value(kind, b)) + 1e-12);
    }
  }
}

TEST_CASE("the conjugate identity holds along the whole ratio axis") {
  const Eigen::ArrayXd r =
      Eigen::ArrayXd::LinSpaced(1000, std::log(1e-3), std::log(1e3)).exp();
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    const Eigen::ArrayXd lhs = f_conj(kind, f_prime(kind, r));
    const Eigen::ArrayXd rhs = r * f_prime(kind, r) - f_value(kind, r);
    CHECK((lhs - rhs).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("variational bound at the optimal critic recovers the self-divergence") {
  const Eigen::ArrayXd t_opt = Eigen::ArrayXd::Constant(8, 0.0);
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    const Eigen::ArrayXd t = Eigen::ArrayXd::Constant(8, f_prime(kind, 1.0));
    const double bound = variational_bound(kind, t, t);
    // f'(1) - f_conj(f'(1)) = f(1): zero except for the unshifted gan form
    CHECK(bound == doctest::Approx(f_value(kind, 1.0)).epsilon(1e-12));
  }
  (void)t_opt;
}

TEST_CASE("kl bound with the exact ratio estimates the analytic divergence") {
  const DistSpec p = GaussianSpec::scalar(0.0, 1.0);
  const DistSpec q = GaussianSpec::scalar(1.0, 1.0);
  RngState rng(31);
  const Eigen::MatrixXd xp = sample(p, 20000, rng).points;
  const Eigen::MatrixXd xq = sample(q, 20000, rng).points;

  auto t_of = [&](const Eigen::MatrixXd& x) {
    Eigen::ArrayXd t(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double r = std::exp(analytic_log_ratio(p, q, x.row(i).transpose()));
      t[i] = f_prime(FDiv::kl, r);
    }
    return t;
  };
  const double bound = variational_bound(FDiv::kl, t_of(xp), t_of(xq));
  CHECK(bound == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("perturbing the critic away from optimal can only lower the bound") {
  Eigen::ArrayXd p(3), q(3);
  p << 0.5, 0.3, 0.2;
  q << 0.2, 0.3, 0.5;
  RngState rng(33);

  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    Eigen::ArrayXd t_opt(3);
    for (Eigen::Index i = 0; i < 3; ++i) t_opt[i] = f_prime(kind, p[i] / q[i]);
    const double at_opt = discrete_bound(kind, p, q, t_opt);
    CHECK(at_opt == doctest::Approx(discrete_fdiv(kind, p, q)).epsilon(1e-12));

    for (int trial = 0; trial < 100; ++trial) {
      Eigen::ArrayXd t = t_opt;
      for (Eigen::Index i = 0; i < 3; ++i) {
        double delta = 0.4 * (rng.next_unit() - 0.5);
        if (conj_needs_negative(kind) && t[i] + delta >= 0.0) delta = -std::abs(delta);
        t[i] += delta;
      }
      CHECK(discrete_bound(kind, p, q, t) <= at_opt + 1e-12);
    }
  }
}

TEST_CASE("ratio losses at the uninformative ratio match closed forms") {
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Constant(6, 1.0);
  CHECK(fdiv_ratio_loss(FDiv::kl, ones, ones) == doctest::Approx(0.0).epsilon(1e-15));
  // the adversarial form at r=1: -log(1/2) + (-log(1/2)) = log 4
  CHECK(fdiv_ratio_loss(FDiv::gan, ones, ones) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("generator losses at the uninformative ratio match closed forms") {
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Constant(5, 1.0);
  CHECK(fdiv_generator_loss(FDiv::kl, ones) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(fdiv_generator_loss(FDiv::gan, ones) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("the adversarial ratio loss is twice the balanced discrimination loss") {
  RngState rng(35);
  const ClassBalance half(0.5);
  const ScoringRule& bern = scoring_rule_by_name("bernoulli");
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::ArrayXd rr = log_uniform(rng, 16, 0.1, 10.0);
    const Eigen::ArrayXd rg = log_uniform(rng, 16, 0.1, 10.0);
    const double lhs = fdiv_ratio_loss(FDiv::gan, rr, rg);
    const double rhs =
        2.0 * ratio_loss_cpe(bern, ratio_to_disc(rr), ratio_to_disc(rg), half);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("tape and array evaluations agree across the family") {
  RngState rng(37);
  const Eigen::ArrayXd rr = log_uniform(rng, 12, 0.2, 5.0);
  const Eigen::ArrayXd rg = log_uniform(rng, 12, 0.2, 5.0);
  for (FDiv kind : all_fdivs()) {
    CAPTURE(fdiv_name(kind));
    ad::Tape tape;
    ad::Var vr = tape.leaf(rr.matrix());
    ad::Var vg = tape.leaf(rg.matrix());
    CHECK(fdiv_ratio_loss(kind, vr, vg).scalar() ==
          doctest::Approx(fdiv_ratio_loss(kind, rr, rg)).epsilon(1e-13));
    CHECK(fdiv_generator_loss(kind, vg).scalar() ==
          doctest::Approx(fdiv_generator_loss(kind, rg)).epsilon(1e-13));
  }
}

TEST_CASE("empty batches are rejected") {
  const Eigen::ArrayXd ones = Eigen::ArrayXd::Constant(3, 1.0), empty;
  CHECK_THROWS_AS(fdiv_ratio_loss(FDiv::kl, empty, ones), std::invalid_argument);
  CHECK_THROWS_AS(fdiv_generator_loss(FDiv::kl, empty), std::invalid_argument);
  CHECK_THROWS_AS(variational_bound(FDiv::kl, empty, ones), std::invalid_argument);
}
