// Reference densities, samplers, and the seeded randomness contract shared by
// the whole bench. All distributions are diagonal-covariance Gaussians or
// finite mixtures of them, so log-densities and ratios have closed forms.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace ratiolab {

// Deterministic stream generator. The state advance is SplitMix64
// (Steele et al.); normal variates are produced by basic Box-Muller, two
// uniforms per draw, cosine branch only, so the state stays a single word.
// The integer stream is bit-identical everywhere; the floating-point stream
// additionally depends on the platform's log/cos rounding.
struct RngState {
  std::uint64_t state;

  explicit RngState(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64();
  // Uniform on (0, 1].
  double next_unit();
  // Standard normal draw.
  double next_normal();
  // Derives an independent stream for parallel or decoupled consumers.
  RngState split(std::uint64_t stream_tag) const;
};

struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;  // diagonal covariance entries, all > 0

  GaussianSpec(Eigen::VectorXd mean_in, Eigen::VectorXd var_in);
  static GaussianSpec standard(int dim);
  static GaussianSpec scalar(double mean, double var);

  int dim() const { return static_cast<int>(mean.size()); }
};

struct MixtureSpec {
  struct Component {
    double weight;
    GaussianSpec gaussian;
  };
  std::vector<Component> components;

  explicit MixtureSpec(std::vector<Component> comps);
  // Equal-weight Gaussians evenly spaced on a circle of the given radius,
  // isotropic with standard deviation sigma. The classic mode-coverage
  // fixture.
  static MixtureSpec ring(int modes, double radius, double sigma);

  int dim() const { return components.front().gaussian.dim(); }
};

using DistSpec = std::variant<GaussianSpec, MixtureSpec>;

int spec_dim(const DistSpec& spec);

enum class SampleSource { real, generated, latent };

struct SampleBatch {
  Eigen::MatrixXd points;  // n x d
  SampleSource source = SampleSource::real;
  std::uint64_t seed_trace = 0;  // rng state at the time of the draw

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

// n i.i.d. draws; mixtures pick a component by weight, then sample it.
// Advances rng in place.
SampleBatch sample(const GaussianSpec& spec, Eigen::Index n, RngState& rng,
                   SampleSource source = SampleSource::real);
SampleBatch sample(const MixtureSpec& spec, Eigen::Index n, RngState& rng,
                   SampleSource source = SampleSource::real);
SampleBatch sample(const DistSpec& spec, Eigen::Index n, RngState& rng,
                   SampleSource source = SampleSource::real);

double log_density(const GaussianSpec& spec, const Eigen::VectorXd& x);
// Log-sum-exp over components.
double log_density(const MixtureSpec& spec, const Eigen::VectorXd& x);
double log_density(const DistSpec& spec, const Eigen::VectorXd& x);

// log p(x) - log q(x), the exact comparison oracle.
double analytic_log_ratio(const DistSpec& p, const DistSpec& q,
                          const Eigen::VectorXd& x);

// Closed-form KL between diagonal Gaussians. Mixtures have no closed form;
// use quadrature_kl from quadrature.hpp for those.
double analytic_kl(const GaussianSpec& p, const GaussianSpec& q);
// Throws std::invalid_argument unless both variants hold Gaussians.
double analytic_kl(const DistSpec& p, const DistSpec& q);

}  // namespace ratiolab
