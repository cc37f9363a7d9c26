#include "ratiolab/ratio_matching.hpp"

#include <cmath>
#include <stdexcept>

namespace ratiolab {

namespace {

void check_batches(const Eigen::ArrayXd& r_real, const Eigen::ArrayXd& r_gen,
                   const char* fn) {
  if (r_real.size() == 0 || r_gen.size() == 0) {
    throw std::invalid_argument(std::string(fn) + ": empty batch");
  }
}

}  // namespace

double lsif_loss(const Eigen::ArrayXd& r_real, const Eigen::ArrayXd& r_gen) {
  check_batches(r_real, r_gen, "lsif_loss");
  return 0.5 * r_gen.square().mean() - r_real.mean();
}

ad::Var lsif_loss(ad::Var r_real, ad::Var r_gen) {
  return 0.5 * ad::mean(ad::square(r_gen)) - ad::mean(r_real);
}

double kliep_loss(const Eigen::ArrayXd& r_real, const Eigen::ArrayXd& r_gen) {
  check_batches(r_real, r_gen, "kliep_loss");
  if ((r_real <= 0.0).any()) {
    throw std::domain_error("kliep_loss: ratio values must be positive");
  }
  return (-r_real.log()).mean() + (r_gen - 1.0).mean();
}

ad::Var kliep_loss(ad::Var r_real, ad::Var r_gen) {
  return ad::mean(-ad::log(r_real)) + ad::mean(r_gen - 1.0);
}

double bregman_ratio_loss(FDiv kind, const Eigen::ArrayXd& r_real,
                          const Eigen::ArrayXd& r_gen) {
  check_batches(r_real, r_gen, "bregman_ratio_loss");
  const Eigen::ArrayXd fp_gen = f_prime(kind, r_gen);
  return (r_gen * fp_gen - f_value(kind, r_gen)).mean() - f_prime(kind, r_real).mean();
}

ad::Var bregman_ratio_loss(FDiv kind, ad::Var r_real, ad::Var r_gen) {
  ad::Var fp_gen = f_prime(kind, r_gen);
  return ad::mean(r_gen * fp_gen - f_value(kind, r_gen)) - ad::mean(f_prime(kind, r_real));
}

double bregman_generator_loss(FDiv kind, const Eigen::ArrayXd& r_gen) {
  if (r_gen.size() == 0) {
    throw std::invalid_argument("bregman_generator_loss: empty batch");
  }
  return (r_gen * f_prime(kind, r_gen)).mean();
}

ad::Var bregman_generator_loss(FDiv kind, ad::Var r_gen) {
  return ad::mean(r_gen * f_prime(kind, r_gen));
}

double bregman_divergence_direct(FDiv kind, const Eigen::ArrayXd& r_star,
                                 const Eigen::ArrayXd& r_hat,
                                 const Eigen::ArrayXd& weights) {
  if (r_star.size() != r_hat.size() || r_star.size() != weights.size()) {
    throw std::invalid_argument("bregman_divergence_direct: size mismatch");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("bregman_divergence_direct: weights must sum to 1");
  }
  const Eigen::ArrayXd fp_hat = f_prime(kind, r_hat);
  return (weights *
          (f_value(kind, r_star) - f_value(kind, r_hat) - fp_hat * (r_star - r_hat)))
      .sum();
}

}  // namespace ratiolab
