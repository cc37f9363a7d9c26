// Implicit generator and ratio/discriminator networks: plain MLPs over the
// tape engine, with selectable output heads and a versioned text checkpoint
// format.

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "ratiolab/param_vector.hpp"
#include "ratiolab/prob.hpp"
#include "ratiolab/tape.hpp"

namespace ratiolab {

// Discriminator outputs are clamped into this interval before log or ratio
// transforms; clamp events stay observable through counters.
inline constexpr double kDiscClampLo = 1e-7;
inline constexpr double kDiscClampHi = 1.0 - 1e-7;
// Positive-head floor: softplus underflows to exactly 0 for inputs below
// about -745, which would break the r > 0 contract.
inline constexpr double kRatioFloor = 1e-30;

struct ClampCounter {
  long count = 0;
};

enum class Activation { identity, tanh_fn, relu_fn };
Activation activation_by_name(const std::string& name);
std::string activation_name(Activation a);

struct LayerSpec {
  int width;
  Activation act;
};

// Dense multilayer perceptron with bias terms; parameters live in a flat
// ParamVector with one weight and one bias slice per layer.
class Mlp {
 public:
  Mlp(int in_dim, std::vector<LayerSpec> layers);

  int in_dim() const { return in_dim_; }
  int out_dim() const { return layers_.back().width; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  ParamVector& params() { return params_; }
  const ParamVector& params() const { return params_; }

  // Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases.
  void init_glorot(RngState& rng);

  // Plain evaluation, row-per-sample.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  // Tape path. bind() creates one leaf per parameter slice holding the
  // current values; apply() records the forward computation.
  struct Bound {
    std::vector<ad::Var> leaves;
  };
  Bound bind(ad::Tape& tape, bool requires_grad) const;
  void push_params(ad::Tape& tape, const Bound& bound) const;
  ad::Var apply(ad::Tape& tape, ad::Var x, const Bound& bound) const;
  Eigen::VectorXd gather_grad(const ad::Tape& tape, const Bound& bound) const;

 private:
  int in_dim_;
  std::vector<LayerSpec> layers_;
  ParamVector params_;
};

// x = G(z): maps latent rows to data rows. The latent prior is a standard
// normal of dimension latent_dim.
class GeneratorNet {
 public:
  GeneratorNet(int latent_dim, const std::vector<int>& hidden, int data_dim,
               Activation hidden_act = Activation::tanh_fn);

  int latent_dim() const { return net_.in_dim(); }
  int data_dim() const { return net_.out_dim(); }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  SampleBatch sample_latent(Eigen::Index n, RngState& rng) const;

 private:
  Mlp net_;
};

SampleBatch generate(const GeneratorNet& gen, const SampleBatch& latent);

enum class Head { probability, positive, unconstrained };
Head head_by_name(const std::string& name);
std::string head_name(Head h);

// Scalar-output network with a range-shaping head:
//   probability   -> sigmoid, D in (0,1)
//   positive      -> softplus (floored), r > 0
//   unconstrained -> identity, t in R
class RatioNet {
 public:
  RatioNet(int data_dim, const std::vector<int>& hidden, Head head,
           Activation hidden_act = Activation::tanh_fn);

  Head head() const { return head_; }
  Mlp& net() { return net_; }
  const Mlp& net() const { return net_; }

  // Head outputs per sample (n x 1).
  Eigen::VectorXd head_values(const Eigen::MatrixXd& x) const;
  ad::Var head_values(ad::Tape& tape, ad::Var x, const Mlp::Bound& bound) const;

  // log r(x) per sample, via the head-appropriate transform. Probability
  // heads use the clamped logit; unconstrained heads are rejected because
  // their output is only ratio-related through a divergence-specific link.
  Eigen::VectorXd log_ratio(const Eigen::MatrixXd& x, ClampCounter* clamps = nullptr) const;

 private:
  Head head_;
  Mlp net_;
};

// D = r / (r + 1) and its inverse. disc_to_ratio clamps D into
// [kDiscClampLo, kDiscClampHi] first and counts clamped entries.
double ratio_to_disc(double r);
double disc_to_ratio(double d, ClampCounter* clamps = nullptr);
Eigen::ArrayXd ratio_to_disc(const Eigen::ArrayXd& r);
Eigen::ArrayXd disc_to_ratio(const Eigen::ArrayXd& d, ClampCounter* clamps = nullptr);
// Tape versions; clamp events are recorded by the tape itself.
ad::Var ratio_to_disc(ad::Var r);
ad::Var disc_to_ratio(ad::Var d);

// Versioned text checkpoint: layout header plus full-precision values.
void save_checkpoint(std::ostream& out, const ParamVector& params);
void save_checkpoint(const std::string& path, const ParamVector& params);
ParamVector load_checkpoint(std::istream& in);
ParamVector load_checkpoint(const std::string& path);

}  // namespace ratiolab
