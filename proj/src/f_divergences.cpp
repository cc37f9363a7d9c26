#include "ratiolab/f_divergences.hpp"

#include <cmath>
#include <stdexcept>

namespace ratiolab {

const std::vector<FDiv>& all_fdivs() {
  static const std::vector<FDiv> table = {FDiv::kl, FDiv::reverse_kl, FDiv::gan,
                                          FDiv::pearson_chi2, FDiv::squared};
  return table;
}

const std::string& fdiv_name(FDiv kind) {
  static const std::string names[] = {"kl", "reverse_kl", "gan", "pearson_chi2", "squared"};
  return names[static_cast<int>(kind)];
}

FDiv fdiv_by_name(const std::string& name) {
  for (FDiv kind : all_fdivs()) {
    if (fdiv_name(kind) == name) return kind;
  }
  throw std::invalid_argument(
      "unknown f-divergence: " + name +
      " (expected one of kl, reverse_kl, gan, pearson_chi2, squared)");
}

bool conj_needs_negative(FDiv kind) {
  return kind == FDiv::reverse_kl || kind == FDiv::gan;
}

namespace {

void require_positive(double u, const char* fn) {
  if (!(u > 0.0)) {
    throw std::domain_error(std::string(fn) + ": ratio argument must be positive");
  }
}

void require_positive(const Eigen::ArrayXd& u, const char* fn) {
  if ((u <= 0.0).any() || !u.isFinite().all()) {
    throw std::domain_error(std::string(fn) + ": ratio arguments must be positive and finite");
  }
}


// -log(1 - e^t) evaluated without cancellation for t near 0-
double gan_conj(double t) { return -std::log(-std::expm1(t)); }

}  // namespace

double f_value(FDiv kind, double u) {
  require_positive(u, "f_value");
  switch (kind) {
    case FDiv::kl:
      return u * std::log(u);
    case FDiv::reverse_kl:
      return -std::log(u);
    case FDiv::gan:
      return u * std::log(u) - (u + 1.0) * std::log(u + 1.0);
    case FDiv::pearson_chi2:
      return (u - 1.0) * (u - 1.0);
    case FDiv::squared:
      return 0.5 * (u - 1.0) * (u - 1.0);
  }
  throw std::logic_error("f_value: unknown kind");
}

Eigen::ArrayXd f_value(FDiv kind, const Eigen::ArrayXd& u) {
  require_positive(u, "f_value");
  switch (kind) {
    case FDiv::kl:
      return u * u.log();
    case FDiv::reverse_kl:
      return -u.log();
    case FDiv::gan:
      return u * u.log() - (u + 1.0) * (u + 1.0).log();
    case FDiv::pearson_chi2:
      return (u - 1.0).square();
    case FDiv::squared:
      return 0.5 * (u - 1.0).square();
  }
  throw std::logic_error("f_value: unknown kind");
}

ad::Var f_value(FDiv kind, ad::Var u) {
  switch (kind) {
    case FDiv::kl:
      return u * ad::log(u);
    case FDiv::reverse_kl:
      return -ad::log(u);
    case FDiv::gan:
      return u * ad::log(u) - (u + 1.0) * ad::log(u + 1.0);
    case FDiv::pearson_chi2:
      return ad::square(u - 1.0);
    case FDiv::squared:
      return 0.5 * ad::square(u - 1.0);
  }
  throw std::logic_error("f_value: unknown kind");
}

double f_prime(FDiv kind, double u) {
  require_positive(u, "f_prime");
  switch (kind) {
    case FDiv::kl:
      return 1.0 + std::log(u);
    case FDiv::reverse_kl:
      return -1.0 / u;
    case FDiv::gan:
      return std::log(u / (u + 1.0));
    case FDiv::pearson_chi2:
      return 2.0 * (u - 1.0);
    case FDiv::squared:
      return u - 1.0;
  }
  throw std::logic_error("f_prime: unknown kind");
}

Eigen::ArrayXd f_prime(FDiv kind, const Eigen::ArrayXd& u) {
  require_positive(u, "f_prime");
  switch (kind) {
    case FDiv::kl:
      return 1.0 + u.log();
    case FDiv::reverse_kl:
      return -u.inverse();
    case FDiv::gan:
      return (u / (u + 1.0)).log();
    case FDiv::pearson_chi2:
      return 2.0 * (u - 1.0);
    case FDiv::squared:
      return u - 1.0;
  }
  throw std::logic_error("f_prime: unknown kind");
}

ad::Var f_prime(FDiv kind, ad::Var u) {
  switch (kind) {
    case FDiv::kl:
      return 1.0 + ad::log(u);
    case FDiv::reverse_kl:
      return -(1.0 / u);
    case FDiv::gan:
      return ad::log(u / (u + 1.0));
    case FDiv::pearson_chi2:
      return 2.0 * (u - 1.0);
    case FDiv::squared:
      return u - 1.0;
  }
  throw std::logic_error("f_prime: unknown kind");
}

double f_conj(FDiv kind, double t) {
  if (conj_needs_negative(kind) && !(t < 0.0)) {
    throw std::domain_error("f_conj: " + fdiv_name(kind) + " conjugate is finite only for t < 0");
  }
  switch (kind) {
    case FDiv::kl:
      return std::exp(t - 1.0);
    case FDiv::reverse_kl:
      return -1.0 - std::log(-t);
    case FDiv::gan:
      return gan_conj(t);
    case FDiv::pearson_chi2:
      return 0.25 * t * t + t;
    case FDiv::squared:
      return t + 0.5 * t * t;
  }
  throw std::logic_error("f_conj: unknown kind");
}

Eigen::ArrayXd f_conj(FDiv kind, const Eigen::ArrayXd& t) {
  if (conj_needs_negative(kind) && (t >= 0.0).any()) {
    throw std::domain_error("f_conj: " + fdiv_name(kind) + " conjugate is finite only for t < 0");
  }
  switch (kind) {
    case FDiv::kl:
      return (t - 1.0).exp();
    case FDiv::reverse_kl:
      return -1.0 - (-t).log();
    case FDiv::gan:
      return t.unaryExpr([](double v) { return gan_conj(v); });
    case FDiv::pearson_chi2:
      return 0.25 * t.square() + t;
    case FDiv::squared:
      return t + 0.5 * t.square();
  }
  throw std::logic_error("f_conj: unknown kind");
}

ad::Var f_conj(FDiv kind, ad::Var t) {
  switch (kind) {
    case FDiv::kl:
      return ad::exp(t - 1.0);
    case FDiv::reverse_kl:
      return -1.0 - ad::log(-t);
    case FDiv::gan:
      return -ad::log(1.0 - ad::exp(t));
    case FDiv::pearson_chi2:
      return 0.25 * ad::square(t) + t;
    case FDiv::squared:
      return t + 0.5 * ad::square(t);
  }
  throw std::logic_error("f_conj: unknown kind");
}

double variational_bound(FDiv kind, const Eigen::ArrayXd& t_real,
                         const Eigen::ArrayXd& t_gen) {
  if (t_real.size() == 0 || t_gen.size() == 0) {
    throw std::invalid_argument("variational_bound: empty batch");
  }
  return t_real.mean() - f_conj(kind, t_gen).mean();
}

ad::Var variational_bound(FDiv kind, ad::Var t_real, ad::Var t_gen) {
  return ad::mean(t_real) - ad::mean(f_conj(kind, t_gen));
}

double fdiv_ratio_loss(FDiv kind, const Eigen::ArrayXd& r_real,
                       const Eigen::ArrayXd& r_gen) {
  if (r_real.size() == 0 || r_gen.size() == 0) {
    throw std::invalid_argument("fdiv_ratio_loss: empty batch");
  }
  return (-f_prime(kind, r_real)).mean() + f_conj(kind, f_prime(kind, r_gen)).mean();
}

ad::Var fdiv_ratio_loss(FDiv kind, ad::Var r_real, ad::Var r_gen) {
  return ad::mean(-f_prime(kind, r_real)) + ad::mean(f_conj(kind, f_prime(kind, r_gen)));
}

double fdiv_generator_loss(FDiv kind, const Eigen::ArrayXd& r_gen) {
  if (r_gen.size() == 0) {
    throw std::invalid_argument("fdiv_generator_loss: empty batch");
  }
  return (-f_conj(kind, f_prime(kind, r_gen))).mean();
}

ad::Var fdiv_generator_loss(FDiv kind, ad::Var r_gen) {
  return ad::mean(-f_conj(kind, f_prime(kind, r_gen)));
}

}  // namespace ratiolab
