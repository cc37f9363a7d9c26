// Class-probability-estimation losses for real-vs-generated discrimination:
// the classic proper-scoring-rule table (Bernoulli, Brier, Exponential,
// Misclassification, Hinge, Spherical), class-prior weighting, and the
// adversarial generator objectives derived from a trained discriminator.
//
// Each rule is a pair of per-class losses (loss_pos for real data, loss_neg
// for generated data) written once as a generic formula and instantiated for
// plain doubles, Eigen arrays, and tape variables.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "ratiolab/nets.hpp"
#include "ratiolab/tape.hpp"

namespace ratiolab {

enum class Rule {
  bernoulli,
  brier,
  exponential,
  misclassification,
  hinge,
  spherical,
};

struct ScoringRule {
  Rule kind;
  std::string name;
  bool differentiable;
  // Whether the expected loss is minimised at D = true class probability;
  // verified numerically by properness_check rather than assumed.
  bool proper;
};

const std::vector<ScoringRule>& scoring_rules();
const ScoringRule& scoring_rule_by_name(const std::string& name);

// Class prior pi = p(y = 1), the probability of the real-data class.
struct ClassBalance {
  double pi;
  explicit ClassBalance(double pi_in) : pi(pi_in) {
    if (!(pi > 0.0 && pi < 1.0)) {
      throw std::invalid_argument("ClassBalance: constraint 0<pi<1 violated");
    }
  }
  // Imbalanced-batch approximation: pi = n_real / (n_real + n_gen).
  static ClassBalance from_counts(Eigen::Index n_real, Eigen::Index n_gen) {
    return ClassBalance(static_cast<double>(n_real) / static_cast<double>(n_real + n_gen));
  }
};

namespace rule_detail {

using std::exp;
using std::log;
using std::sqrt;

inline double relu0(double x) { return x > 0.0 ? x : 0.0; }
inline Eigen::ArrayXd relu0(const Eigen::ArrayXd& x) { return x.max(0.0); }
inline ad::Var relu0(ad::Var x) { return ad::relu(x); }

inline double step_le_half(double d) { return d <= 0.5 ? 1.0 : 0.0; }
inline Eigen::ArrayXd step_le_half(const Eigen::ArrayXd& d) {
  return (d <= 0.5).cast<double>();
}

// loss on the positive (real-data) class as a function of D
template <class T>
T loss_pos(Rule kind, const T& d) {
  switch (kind) {
    case Rule::bernoulli:
      return -log(d);
    case Rule::brier:
      return (1.0 - d) * (1.0 - d);
    case Rule::exponential:
      return sqrt((1.0 - d) / d);
    case Rule::misclassification:
      if constexpr (std::is_same_v<T, ad::Var>) {
        throw std::invalid_argument("misclassification rule has zero gradient a.e. and is not trainable");
      } else {
        return step_le_half(d);
      }
    case Rule::hinge:
      return relu0(T(1.0 - log(d / (1.0 - d))));
    case Rule::spherical:
      return -(d / sqrt(1.0 - 2.0 * d + 2.0 * d * d));
  }
  throw std::logic_error("loss_pos: unknown rule");
}

// loss on the negative (generated-data) class as a function of D
template <class T>
T loss_neg(Rule kind, const T& d) {
  switch (kind) {
    case Rule::bernoulli:
      return -log(1.0 - d);
    case Rule::brier:
      return d * d;
    case Rule::exponential:
      return sqrt(d / (1.0 - d));
    case Rule::misclassification:
      if constexpr (std::is_same_v<T, ad::Var>) {
        throw std::invalid_argument("misclassification rule has zero gradient a.e. and is not trainable");
      } else {
        return 1.0 - step_le_half(d);
      }
    case Rule::hinge:
      return relu0(T(1.0 + log(d / (1.0 - d))));
    case Rule::spherical:
      return -((1.0 - d) / sqrt(1.0 - 2.0 * d + 2.0 * d * d));
  }
  throw std::logic_error("loss_neg: unknown rule");
}

}  // namespace rule_detail

// Whether the rule's formulas take a log or ratio of D and therefore need
// the numeric clamp first.
bool rule_needs_clamp(Rule kind);

// pi * mean(loss_pos(D_real)) + (1 - pi) * mean(loss_neg(D_gen)).
// D values are clamped into [kDiscClampLo, kDiscClampHi] before log/ratio
// transforms; clamped entries are counted.
double ratio_loss_cpe(const ScoringRule& rule, const Eigen::ArrayXd& d_real,
                      const Eigen::ArrayXd& d_gen, ClassBalance bal,
                      ClampCounter* clamps = nullptr);
ad::Var ratio_loss_cpe(const ScoringRule& rule, ad::Var d_real, ad::Var d_gen,
                       ClassBalance bal);

enum class GenVariant { minimax, nonsaturating, log_ratio };
GenVariant gen_variant_by_name(const std::string& name);

// minimax        ->  mean(log(1 - D))
// nonsaturating  ->  mean(-log D)
// log_ratio      ->  mean(-log(D / (1 - D)))
double generator_loss_cpe(GenVariant variant, const Eigen::ArrayXd& d_gen,
                          ClampCounter* clamps = nullptr);
ad::Var generator_loss_cpe(GenVariant variant, ad::Var d_gen);

// For each eta in the grid, checks that the expected loss
// eta * loss_pos(D) + (1 - eta) * loss_neg(D) is minimised (over a dense D
// grid of the given resolution) at D = eta. Throws for the
// non-differentiable misclassification rule.
bool properness_check(const ScoringRule& rule, std::span<const double> eta_grid,
                      double grid_step = 1e-3);

}  // namespace ratiolab
