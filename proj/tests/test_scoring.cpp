#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "ratiolab/scoring_rules.hpp"

using namespace ratiolab;

namespace {

Eigen::ArrayXd constant(Eigen::Index n, double v) { return Eigen::ArrayXd::Constant(n, v); }

// Expected per-point loss on a two-outcome support with masses p, q and
// pointwise discriminator values d: the exact population objective.
double discrete_expected_loss(const ScoringRule& rule, const Eigen::ArrayXd& p_mass,
                              const Eigen::ArrayXd& q_mass, const Eigen::ArrayXd& d,
                              double pi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    total += pi * p_mass[i] * rule_detail::loss_pos(rule.kind, d[i]) +
             (1.0 - pi) * q_mass[i] * rule_detail::loss_neg(rule.kind, d[i]);
  }
  return total;
}

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

double discrete_kl(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) total += a[i] * std::log(a[i] / b[i]);
  return total;
}

}  // namespace

TEST_CASE("rule table exposes the six rules with their flags") {
  CHECK(scoring_rules().size() == 6);
  CHECK(scoring_rule_by_name("bernoulli").differentiable);
  CHECK(scoring_rule_by_name("bernoulli").proper);
  CHECK_FALSE(scoring_rule_by_name("misclassification").differentiable);
  CHECK(scoring_rule_by_name("hinge").differentiable);
  CHECK_FALSE(scoring_rule_by_name("hinge").proper);
  CHECK_THROWS_AS(scoring_rule_by_name("logistic"), std::invalid_argument);
}

TEST_CASE("class balance enforces its open interval") {
  CHECK(ClassBalance(0.5).pi == 0.5);
  CHECK_THROWS_WITH_AS(ClassBalance(1.5), "ClassBalance: constraint 0<pi<1 violated",
                       std::invalid_argument);
  CHECK_THROWS_AS(ClassBalance(0.0), std::invalid_argument);
  CHECK(ClassBalance::from_counts(30, 10).pi == doctest::Approx(0.75));
}

TEST_CASE("ratio losses at the uninformative discriminator match closed forms") {
  const ClassBalance half(0.5);
  const Eigen::ArrayXd d = constant(10, 0.5);
  CHECK(ratio_loss_cpe(scoring_rule_by_name("bernoulli"), d, d, half) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ratio_loss_cpe(scoring_rule_by_name("brier"), d, d, half) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ratio_loss_cpe(scoring_rule_by_name("exponential"), d, d, half) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ratio_loss_cpe(scoring_rule_by_name("spherical"), d, d, half) ==
        doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK(ratio_loss_cpe(scoring_rule_by_name("misclassification"), d, d, half) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // hinge: logit(0.5) = 0, so both class losses are relu(1) = 1
  CHECK(ratio_loss_cpe(scoring_rule_by_name("hinge"), d, d, half) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generator losses at the uninformative discriminator match closed forms") {
  const Eigen::ArrayXd d = constant(7, 0.5);
  CHECK(generator_loss_cpe(GenVariant::minimax, d) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(generator_loss_cpe(GenVariant::nonsaturating, d) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(generator_loss_cpe(GenVariant::log_ratio, d) == doctest::Approx(0.0));
}

TEST_CASE("log-ratio generator loss decomposes into the other two variants") {
  Eigen::ArrayXd d(6);
  d << 0.11, 0.32, 0.5, 0.64, 0.77, 0.9;
  const double lhs = generator_loss_cpe(GenVariant::log_ratio, d);
  const double rhs = generator_loss_cpe(GenVariant::nonsaturating, d) +
                     generator_loss_cpe(GenVariant::minimax, d);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("saturated generator losses are clamped finite with the expected sign") {
  ClampCounter clamps;
  const Eigen::ArrayXd d = constant(4, 1.0);
  const double loss = generator_loss_cpe(GenVariant::log_ratio, d, &clamps);
  CHECK(clamps.count == 4);
  CHECK(std::isfinite(loss));
  CHECK(loss < 0.0);
}

TEST_CASE("properness holds exactly for the four strictly proper rules") {
  const std::vector<double> etas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (const char* name : {"bernoulli", "brier", "exponential", "spherical"}) {
    CAPTURE(name);
    CHECK(properness_check(scoring_rule_by_name(name), etas));
  }
}

TEST_CASE("hinge loss is not a proper scoring rule") {
  const std::vector<double> etas = {0.2, 0.35, 0.65, 0.8};
  CHECK_FALSE(properness_check(scoring_rule_by_name("hinge"), etas));
}

TEST_CASE("properness check rejects the non-differentiable rule") {
  const std::vector<double> etas = {0.5};
  CHECK_THROWS_AS(properness_check(scoring_rule_by_name("misclassification"), etas),
                  std::invalid_argument);
}

TEST_CASE("ratio loss is affine in the class prior") {
  Eigen::ArrayXd d_real(5), d_gen(4);
  d_real << 0.6, 0.7, 0.55, 0.8, 0.65;
  d_gen << 0.3, 0.2, 0.45, 0.35;
  const ScoringRule& rule = scoring_rule_by_name("brier");
  const double at_02 = ratio_loss_cpe(rule, d_real, d_gen, ClassBalance(0.2));
  const double at_05 = ratio_loss_cpe(rule, d_real, d_gen, ClassBalance(0.5));
  const double at_08 = ratio_loss_cpe(rule, d_real, d_gen, ClassBalance(0.8));
  CHECK(at_05 == doctest::Approx(0.5 * (at_02 + at_08)).epsilon(1e-14));
}

TEST_CASE("empty batches are rejected") {
  const Eigen::ArrayXd d = constant(3, 0.5), empty;
  const ClassBalance half(0.5);
  CHECK_THROWS_AS(ratio_loss_cpe(scoring_rule_by_name("bernoulli"), empty, d, half),
                  std::invalid_argument);
  CHECK_THROWS_AS(ratio_loss_cpe(scoring_rule_by_name("bernoulli"), d, empty, half),
                  std::invalid_argument);
  CHECK_THROWS_AS(generator_loss_cpe(GenVariant::minimax, empty), std::invalid_argument);
}

TEST_CASE("optimal discriminator on a discrete support is the posterior probability") {
  Eigen::ArrayXd p_mass(2), q_mass(2);
  p_mass << 0.7, 0.3;
  q_mass << 0.4, 0.6;
  const ScoringRule& bern = scoring_rule_by_name("bernoulli");

  for (double pi : {0.5, 0.35}) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      // the objective separates over support points, so minimise pointwise
      auto pointwise = [&](double d) {
        return pi * p_mass[i] * rule_detail::loss_pos(bern.kind, d) +
               (1.0 - pi) * q_mass[i] * rule_detail::loss_neg(bern.kind, d);
      };
      const double best = ternary_min(pointwise, 1e-9, 1.0 - 1e-9);
      const double posterior =
          pi * p_mass[i] / (pi * p_mass[i] + (1.0 - pi) * q_mass[i]);
      CHECK(best == doctest::Approx(posterior).epsilon(1e-6));
      if (pi == 0.5) {
        CHECK(posterior ==
              doctest::Approx(ratio_to_disc(p_mass[i] / q_mass[i])).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("optimal balanced loss encodes the jensen-shannon divergence") {
  Eigen::ArrayXd p_mass(3), q_mass(3);
  p_mass << 0.5, 0.3, 0.2;
  q_mass << 0.2, 0.3, 0.5;
  const ScoringRule& bern = scoring_rule_by_name("bernoulli");

  Eigen::ArrayXd d_star(3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    auto pointwise = [&](double d) {
      return 0.5 * p_mass[i] * rule_detail::loss_pos(bern.kind, d) +
             0.5 * q_mass[i] * rule_detail::loss_neg(bern.kind, d);
    };
    d_star[i] = ternary_min(pointwise, 1e-9, 1.0 - 1e-9);
  }
  const double loss_at_opt =
      discrete_expected_loss(bern, p_mass, q_mass, d_star, 0.5);

  const Eigen::ArrayXd mid = 0.5 * (p_mass + q_mass);
  const double js = 0.5 * discrete_kl(p_mass, mid) + 0.5 * discrete_kl(q_mass, mid);
  // the balanced loss carries the 1/2 class weights, hence the factor 2
  CHECK(2.0 * loss_at_opt == doctest::Approx(std::log(4.0) - 2.0 * js).epsilon(1e-6));
}

TEST_CASE("relabelling classes leaves every rule's loss unchanged") {
  Eigen::ArrayXd d_real(4), d_gen(3);
  d_real << 0.81, 0.62, 0.55, 0.91;
  d_gen << 0.2, 0.41, 0.13;
  for (const ScoringRule& rule : scoring_rules()) {
    CAPTURE(rule.name);
    const double direct = ratio_loss_cpe(rule, d_real, d_gen, ClassBalance(0.3));
    const double relabelled = ratio_loss_cpe(rule, Eigen::ArrayXd(1.0 - d_gen),
                                             Eigen::ArrayXd(1.0 - d_real), ClassBalance(0.7));
    CHECK(direct == doctest::Approx(relabelled).epsilon(1e-12));
  }
}

TEST_CASE("tape and array evaluations of the losses agree") {
  Eigen::ArrayXd d_real(5), d_gen(5);
  d_real << 0.62, 0.75, 0.58, 0.83, 0.69;
  d_gen << 0.31, 0.24, 0.42, 0.18, 0.37;
  const ClassBalance bal(0.4);

  for (const ScoringRule& rule : scoring_rules()) {
    if (!rule.differentiable) continue;
    CAPTURE(rule.name);
    ad::Tape tape;
    ad::Var vr = tape.leaf(d_real.matrix());
    ad::Var vg = tape.leaf(d_gen.matrix());
    const double from_tape = ratio_loss_cpe(rule, vr, vg, bal).scalar();
    CHECK(from_tape == doctest::Approx(ratio_loss_cpe(rule, d_real, d_gen, bal))
                           .epsilon(1e-14));
  }

  for (GenVariant variant :
       {GenVariant::minimax, GenVariant::nonsaturating, GenVariant::log_ratio}) {
    ad::Tape tape;
    ad::Var vg = tape.leaf(d_gen.matrix());
    CHECK(generator_loss_cpe(variant, vg).scalar() ==
          doctest::Approx(generator_loss_cpe(variant, d_gen)).epsilon(1e-14));
  }
}

TEST_CASE("the non-differentiable rule refuses tape evaluation") {
  ad::Tape tape;
  ad::Var d = tape.leaf(Eigen::MatrixXd::Constant(3, 1, 0.5));
  CHECK_THROWS_AS(
      ratio_loss_cpe(scoring_rule_by_name("misclassification"), d, d, ClassBalance(0.5)),
      std::invalid_argument);
}

TEST_CASE("out-of-range probabilities are clamped and counted in ratio losses") {
  ClampCounter clamps;
  Eigen::ArrayXd d_real(2), d_gen(2);
  d_real << 1.0, 0.9;
  d_gen << 0.1, 0.0;
  const double loss = ratio_loss_cpe(scoring_rule_by_name("bernoulli"), d_real, d_gen,
                                     ClassBalance(0.5), &clamps);
  CHECK(clamps.count == 2);
  CHECK(std::isfinite(loss));

  // rules without log/ratio transforms do not clamp
  ClampCounter brier_clamps;
  ratio_loss_cpe(scoring_rule_by_name("brier"), d_real, d_gen, ClassBalance(0.5),
                 &brier_clamps);
  CHECK(brier_clamps.count == 0);
}

TEST_CASE("gen variant names resolve") {
  CHECK(gen_variant_by_name("minimax") == GenVariant::minimax);
  CHECK(gen_variant_by_name("nonsaturating") == GenVariant::nonsaturating);
  CHECK(gen_variant_by_name("log_ratio") == GenVariant::log_ratio);
  CHECK_THROWS_AS(gen_variant_by_name("wasserstein"), std::invalid_argument);
}
