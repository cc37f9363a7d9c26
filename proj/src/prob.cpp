#include "ratiolab/prob.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ratiolab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngState::next_u64() { return splitmix64(state); }

double RngState::next_unit() {
  // 53 random bits, shifted into (0, 1].
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngState::next_normal() {
  const double u1 = next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

RngState RngState::split(std::uint64_t stream_tag) const {
  std::uint64_t s = state ^ (0xA0761D6478BD642FULL * (stream_tag + 1));
  splitmix64(s);
  return RngState(s);
}

GaussianSpec::GaussianSpec(Eigen::VectorXd mean_in, Eigen::VectorXd var_in)
    : mean(std::move(mean_in)), var(std::move(var_in)) {
  if (mean.size() == 0 || mean.size() != var.size()) {
    throw std::invalid_argument("GaussianSpec: mean and var must be nonempty and equal length");
  }
  if ((var.array() <= 0.0).any()) {
    throw std::invalid_argument("GaussianSpec: all variance entries must be > 0");
  }
}

GaussianSpec GaussianSpec::standard(int dim) {
  return GaussianSpec(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

GaussianSpec GaussianSpec::scalar(double mean, double var) {
  Eigen::VectorXd m(1), v(1);
  m << mean;
  v << var;
  return GaussianSpec(m, v);
}

MixtureSpec::MixtureSpec(std::vector<Component> comps) : components(std::move(comps)) {
  if (components.empty()) {
    throw std::invalid_argument("MixtureSpec: at least one component required");
  }
  double total = 0.0;
  const int d = components.front().gaussian.dim();
  for (const auto& c : components) {
    if (c.weight <= 0.0 || c.weight > 1.0) {
      throw std::invalid_argument("MixtureSpec: weights must lie in (0, 1]");
    }
    if (c.gaussian.dim() != d) {
      throw std::invalid_argument("MixtureSpec: all components must share a dimension");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("MixtureSpec: weights must sum to 1 within 1e-12");
  }
}

MixtureSpec MixtureSpec::ring(int modes, double radius, double sigma) {
  if (modes < 1) throw std::invalid_argument("MixtureSpec::ring: modes must be >= 1");
  std::vector<Component> comps;
  comps.reserve(modes);
  for (int k = 0; k < modes; ++k) {
    const double angle = kTwoPi * k / modes;
    Eigen::VectorXd mean(2), var(2);
    mean << radius * std::cos(angle), radius * std::sin(angle);
    var << sigma * sigma, sigma * sigma;
    comps.push_back({1.0 / modes, GaussianSpec(mean, var)});
  }
  // Rounding can leave the weight sum off by an ulp; renormalise.
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return MixtureSpec(std::move(comps));
}

int spec_dim(const DistSpec& spec) {
  return std::visit([](const auto& s) { return s.dim(); }, spec);
}

SampleBatch sample(const GaussianSpec& spec, Eigen::Index n, RngState& rng,
                   SampleSource source) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  SampleBatch batch;
  batch.source = source;
  batch.seed_trace = rng.state;
  batch.points.resize(n, spec.dim());
  const Eigen::VectorXd sd = spec.var.array().sqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < spec.dim(); ++j) {
      batch.points(i, j) = spec.mean[j] + sd[j] * rng.next_normal();
    }
  }
  return batch;
}

SampleBatch sample(const MixtureSpec& spec, Eigen::Index n, RngState& rng,
                   SampleSource source) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  SampleBatch batch;
  batch.source = source;
  batch.seed_trace = rng.state;
  batch.points.resize(n, spec.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.next_unit();
    double cum = 0.0;
    std::size_t pick = spec.components.size() - 1;
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
      cum += spec.components[k].weight;
      if (u <= cum) {
        pick = k;
        break;
      }
    }
    const GaussianSpec& g = spec.components[pick].gaussian;
    for (int j = 0; j < g.dim(); ++j) {
      batch.points(i, j) = g.mean[j] + std::sqrt(g.var[j]) * rng.next_normal();
    }
  }
  return batch;
}

SampleBatch sample(const DistSpec& spec, Eigen::Index n, RngState& rng, SampleSource source) {
  return std::visit([&](const auto& s) { return sample(s, n, rng, source); }, spec);
}

double log_density(const GaussianSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.mean.size()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  const Eigen::ArrayXd diff = (x - spec.mean).array();
  const Eigen::ArrayXd v = spec.var.array();
  const double quad = (diff.square() / v).sum();
  const double logdet = v.log().sum();
  return -0.5 * (spec.dim() * std::log(kTwoPi) + logdet + quad);
}

double log_density(const MixtureSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dim()) {
    throw std::invalid_argument("log_density: dimension mismatch");
  }
  Eigen::ArrayXd terms(spec.components.size());
  for (std::size_t k = 0; k < spec.components.size(); ++k) {
    terms[static_cast<Eigen::Index>(k)] =
        std::log(spec.components[k].weight) + log_density(spec.components[k].gaussian, x);
  }
  const double m = terms.maxCoeff();
  return m + std::log((terms - m).exp().sum());
}

double log_density(const DistSpec& spec, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& s) { return log_density(s, x); }, spec);
}

double analytic_log_ratio(const DistSpec& p, const DistSpec& q, const Eigen::VectorXd& x) {
  if (spec_dim(p) != spec_dim(q)) {
    throw std::invalid_argument("analytic_log_ratio: dimension mismatch");
  }
  return log_density(p, x) - log_density(q, x);
}

double analytic_kl(const GaussianSpec& p, const GaussianSpec& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("analytic_kl: dimension mismatch");
  }
  const Eigen::ArrayXd vp = p.var.array();
  const Eigen::ArrayXd vq = q.var.array();
  const Eigen::ArrayXd dm = (p.mean - q.mean).array();
  return 0.5 * (vp / vq + dm.square() / vq - 1.0 + (vq / vp).log()).sum();
}

double analytic_kl(const DistSpec& p, const DistSpec& q) {
  const auto* gp = std::get_if<GaussianSpec>(&p);
  const auto* gq = std::get_if<GaussianSpec>(&q);
  if (gp == nullptr || gq == nullptr) {
    throw std::invalid_argument(
        "analytic_kl: closed form exists for Gaussian pairs only; use quadrature_kl for mixtures");
  }
  return analytic_kl(*gp, *gq);
}

}  // namespace ratiolab
