#include "ratiolab/scoring_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ratiolab {

const std::vector<ScoringRule>& scoring_rules() {
  static const std::vector<ScoringRule> table = {
      {Rule::bernoulli, "bernoulli", true, true},
      {Rule::brier, "brier", true, true},
      {Rule::exponential, "exponential", true, true},
      {Rule::misclassification, "misclassification", false, true},
      {Rule::hinge, "hinge", true, false},
      {Rule::spherical, "spherical", true, true},
  };
  return table;
}

const ScoringRule& scoring_rule_by_name(const std::string& name) {
  for (const ScoringRule& r : scoring_rules()) {
    if (r.name == name) return r;
  }
  throw std::invalid_argument("unknown scoring rule: " + name);
}

bool rule_needs_clamp(Rule kind) {
  switch (kind) {
    case Rule::bernoulli:
    case Rule::exponential:
    case Rule::hinge:
      return true;
    case Rule::brier:
    case Rule::misclassification:
    case Rule::spherical:
      return false;
  }
  throw std::logic_error("rule_needs_clamp: unknown rule");
}

namespace {

Eigen::ArrayXd clamp_disc(const Eigen::ArrayXd& d, ClampCounter* clamps) {
  if (clamps != nullptr) {
    clamps->count += (d < kDiscClampLo || d > kDiscClampHi).count();
  }
  return d.max(kDiscClampLo).min(kDiscClampHi);
}

}  // namespace

double ratio_loss_cpe(const ScoringRule& rule, const Eigen::ArrayXd& d_real,
                      const Eigen::ArrayXd& d_gen, ClassBalance bal,
                      ClampCounter* clamps) {
  if (d_real.size() == 0 || d_gen.size() == 0) {
    throw std::invalid_argument("ratio_loss_cpe: empty batch");
  }
  Eigen::ArrayXd dr = d_real;
  Eigen::ArrayXd dg = d_gen;
  if (rule_needs_clamp(rule.kind)) {
    dr = clamp_disc(dr, clamps);
    dg = clamp_disc(dg, clamps);
  }
  const double pos = rule_detail::loss_pos(rule.kind, dr).mean();
  const double neg = rule_detail::loss_neg(rule.kind, dg).mean();
  return bal.pi * pos + (1.0 - bal.pi) * neg;
}

ad::Var ratio_loss_cpe(const ScoringRule& rule, ad::Var d_real, ad::Var d_gen,
                       ClassBalance bal) {
  if (!rule.differentiable) {
    throw std::invalid_argument("ratio_loss_cpe: rule '" + rule.name + "' is not differentiable");
  }
  if (rule_needs_clamp(rule.kind)) {
    d_real = ad::clamp(d_real, kDiscClampLo, kDiscClampHi);
    d_gen = ad::clamp(d_gen, kDiscClampLo, kDiscClampHi);
  }
  ad::Var pos = ad::mean(rule_detail::loss_pos(rule.kind, d_real));
  ad::Var neg = ad::mean(rule_detail::loss_neg(rule.kind, d_gen));
  return bal.pi * pos + (1.0 - bal.pi) * neg;
}

GenVariant gen_variant_by_name(const std::string& name) {
  if (name == "minimax") return GenVariant::minimax;
  if (name == "nonsaturating") return GenVariant::nonsaturating;
  if (name == "log_ratio") return GenVariant::log_ratio;
  throw std::invalid_argument("unknown generator loss: " + name);
}

double generator_loss_cpe(GenVariant variant, const Eigen::ArrayXd& d_gen,
                          ClampCounter* clamps) {
  if (d_gen.size() == 0) {
    throw std::invalid_argument("generator_loss_cpe: empty batch");
  }
  const Eigen::ArrayXd d = clamp_disc(d_gen, clamps);
  switch (variant) {
    case GenVariant::minimax:
      return (1.0 - d).log().mean();
    case GenVariant::nonsaturating:
      return (-d.log()).mean();
    case GenVariant::log_ratio:
      return (-(d / (1.0 - d)).log()).mean();
  }
  throw std::logic_error("generator_loss_cpe: unknown variant");
}

ad::Var generator_loss_cpe(GenVariant variant, ad::Var d_gen) {
  ad::Var d = ad::clamp(d_gen, kDiscClampLo, kDiscClampHi);
  switch (variant) {
    case GenVariant::minimax:
      return ad::mean(ad::log(1.0 - d));
    case GenVariant::nonsaturating:
      return ad::mean(-ad::log(d));
    case GenVariant::log_ratio:
      return ad::mean(-ad::log(d / (1.0 - d)));
  }
  throw std::logic_error("generator_loss_cpe: unknown variant");
}

bool properness_check(const ScoringRule& rule, std::span<const double> eta_grid,
                      double grid_step) {
  if (!rule.differentiable) {
    throw std::invalid_argument("properness_check: rule '" + rule.name + "' is not differentiable");
  }
  if (!(grid_step > 0.0 && grid_step < 0.5)) {
    throw std::invalid_argument("properness_check: grid_step out of range");
  }
  const auto n = static_cast<Eigen::Index>(std::llround(1.0 / grid_step));
  for (double eta : eta_grid) {
    if (!(eta > 0.0 && eta < 1.0)) {
      throw std::invalid_argument("properness_check: eta must lie in (0,1)");
    }
    double best_d = 0.0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = (static_cast<double>(j) + 0.5) * grid_step;
      const double loss = eta * rule_detail::loss_pos(rule.kind, d) +
                          (1.0 - eta) * rule_detail::loss_neg(rule.kind, d);
      if (loss < best_loss) {
        best_loss = loss;
        best_d = d;
      }
    }
    if (std::abs(best_d - eta) > grid_step) return false;
  }
  return true;
}

}  // namespace ratiolab
