#include "ratiolab/nets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ratiolab {

Activation activation_by_name(const std::string& name) {
  if (name == "tanh") return Activation::tanh_fn;
  if (name == "relu") return Activation::relu_fn;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "' (tanh|relu|identity)");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh_fn: return "tanh";
    case Activation::relu_fn: return "relu";
  }
  return "?";
}

namespace {

ParamLayout mlp_layout(int in_dim, const std::vector<LayerSpec>& layers) {
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> shapes;
  int fan_in = in_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    shapes.push_back({"w" + std::to_string(i), {fan_in, layers[i].width}});
    shapes.push_back({"b" + std::to_string(i), {1, layers[i].width}});
    fan_in = layers[i].width;
  }
  return ParamLayout::build(std::move(shapes));
}

Eigen::MatrixXd apply_activation(Eigen::MatrixXd h, Activation act) {
  switch (act) {
    case Activation::identity: return h;
    case Activation::tanh_fn: return h.array().tanh().matrix();
    case Activation::relu_fn: return h.cwiseMax(0.0);
  }
  return h;
}

}  // namespace

Mlp::Mlp(int in_dim, std::vector<LayerSpec> layers)
    : in_dim_(in_dim), layers_(std::move(layers)) {
  if (in_dim_ < 1 || layers_.empty()) {
    throw std::invalid_argument("Mlp: need a positive input dim and at least one layer");
  }
  for (const LayerSpec& l : layers_) {
    if (l.width < 1) throw std::invalid_argument("Mlp: layer widths must be >= 1");
  }
  params_ = ParamVector(mlp_layout(in_dim_, layers_));
}

void Mlp::init_glorot(RngState& rng) {
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    auto w = params_.matrix(2 * li);
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = (2.0 * rng.next_unit() - 1.0) * bound;
      }
    }
    params_.matrix(2 * li + 1).setZero();
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.cols() != in_dim_) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  Eigen::MatrixXd h = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    h = (h * params_.matrix(2 * li)).rowwise() + params_.matrix(2 * li + 1).row(0);
    h = apply_activation(std::move(h), layers_[li].act);
  }
  return h;
}

Mlp::Bound Mlp::bind(ad::Tape& tape, bool requires_grad) const {
  Bound bound;
  for (std::size_t i = 0; i < params_.layout().count(); ++i) {
    bound.leaves.push_back(tape.leaf(params_.matrix(i), requires_grad));
  }
  return bound;
}

void Mlp::push_params(ad::Tape& tape, const Bound& bound) const {
  for (std::size_t i = 0; i < bound.leaves.size(); ++i) {
    tape.set_value(bound.leaves[i], params_.matrix(i));
  }
}

ad::Var Mlp::apply(ad::Tape& tape, ad::Var x, const Bound& bound) const {
  ad::Var h = x;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    h = ad::add_rowvec(ad::matmul(h, bound.leaves[2 * li]), bound.leaves[2 * li + 1]);
    switch (layers_[li].act) {
      case Activation::identity: break;
      case Activation::tanh_fn: h = ad::tanh(h); break;
      case Activation::relu_fn: h = ad::relu(h); break;
    }
  }
  return h;
}

Eigen::VectorXd Mlp::gather_grad(const ad::Tape& tape, const Bound& bound) const {
  Eigen::VectorXd flat(params_.size());
  for (std::size_t i = 0; i < bound.leaves.size(); ++i) {
    const ParamSlice& s = params_.layout().slice(i);
    const Eigen::MatrixXd& g = tape.grad(bound.leaves[i]);
    Eigen::Map<Eigen::MatrixXd>(flat.data() + s.offset, s.rows, s.cols) = g;
  }
  return flat;
}

namespace {

std::vector<LayerSpec> with_output_layer(const std::vector<int>& hidden, int out_dim,
                                         Activation hidden_act) {
  std::vector<LayerSpec> layers;
  for (int w : hidden) layers.push_back({w, hidden_act});
  layers.push_back({out_dim, Activation::identity});
  return layers;
}

}  // namespace

GeneratorNet::GeneratorNet(int latent_dim, const std::vector<int>& hidden, int data_dim,
                           Activation hidden_act)
    : net_(latent_dim, with_output_layer(hidden, data_dim, hidden_act)) {}

SampleBatch GeneratorNet::sample_latent(Eigen::Index n, RngState& rng) const {
  return sample(GaussianSpec::standard(latent_dim()), n, rng, SampleSource::latent);
}

SampleBatch generate(const GeneratorNet& gen, const SampleBatch& latent) {
  if (latent.dim() != gen.latent_dim()) {
    throw std::invalid_argument("generate: latent dimension mismatch");
  }
  SampleBatch out;
  out.points = gen.net().forward(latent.points);
  out.source = SampleSource::generated;
  out.seed_trace = latent.seed_trace;
  return out;
}

Head head_by_name(const std::string& name) {
  if (name == "probability") return Head::probability;
  if (name == "positive") return Head::positive;
  if (name == "unconstrained") return Head::unconstrained;
  throw std::invalid_argument("unknown head '" + name +
                              "' (probability|positive|unconstrained)");
}

std::string head_name(Head h) {
  switch (h) {
    case Head::probability: return "probability";
    case Head::positive: return "positive";
    case Head::unconstrained: return "unconstrained";
  }
  return "?";
}

RatioNet::RatioNet(int data_dim, const std::vector<int>& hidden, Head head,
                   Activation hidden_act)
    : head_(head), net_(data_dim, with_output_layer(hidden, 1, hidden_act)) {}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

Eigen::VectorXd RatioNet::head_values(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd raw = net_.forward(x).col(0);
  switch (head_) {
    case Head::probability:
      return raw.unaryExpr([](double v) { return stable_sigmoid(v); });
    case Head::positive:
      return raw.unaryExpr([](double v) { return std::max(stable_softplus(v), kRatioFloor); });
    case Head::unconstrained:
      return raw;
  }
  return raw;
}

ad::Var RatioNet::head_values(ad::Tape& tape, ad::Var x, const Mlp::Bound& bound) const {
  ad::Var raw = net_.apply(tape, x, bound);
  switch (head_) {
    case Head::probability:
      return ad::sigmoid(raw);
    case Head::positive:
      return ad::clamp(ad::softplus(raw), kRatioFloor,
                       std::numeric_limits<double>::infinity());
    case Head::unconstrained:
      return raw;
  }
  return raw;
}

Eigen::VectorXd RatioNet::log_ratio(const Eigen::MatrixXd& x, ClampCounter* clamps) const {
  const Eigen::VectorXd h = head_values(x);
  switch (head_) {
    case Head::probability: {
      Eigen::ArrayXd r = disc_to_ratio(h.array(), clamps);
      return r.log().matrix();
    }
    case Head::positive:
      return h.array().log().matrix();
    case Head::unconstrained:
      throw std::invalid_argument(
          "RatioNet::log_ratio: unconstrained head has no direct ratio interpretation");
  }
  return h;
}

double ratio_to_disc(double r) {
  if (r < 0.0) throw std::invalid_argument("ratio_to_disc: r must be >= 0");
  return r / (r + 1.0);
}

double disc_to_ratio(double d, ClampCounter* clamps) {
  if (d < kDiscClampLo || d > kDiscClampHi) {
    if (clamps != nullptr) ++clamps->count;
    d = std::min(std::max(d, kDiscClampLo), kDiscClampHi);
  }
  return d / (1.0 - d);
}

Eigen::ArrayXd ratio_to_disc(const Eigen::ArrayXd& r) {
  if ((r < 0.0).any()) throw std::invalid_argument("ratio_to_disc: r must be >= 0");
  return r / (r + 1.0);
}

Eigen::ArrayXd disc_to_ratio(const Eigen::ArrayXd& d, ClampCounter* clamps) {
  if (clamps != nullptr) {
    clamps->count += (d < kDiscClampLo || d > kDiscClampHi).count();
  }
  const Eigen::ArrayXd c = d.max(kDiscClampLo).min(kDiscClampHi);
  return c / (1.0 - c);
}

ad::Var ratio_to_disc(ad::Var r) { return r / (r + 1.0); }

ad::Var disc_to_ratio(ad::Var d) {
  ad::Var c = ad::clamp(d, kDiscClampLo, kDiscClampHi);
  return c / (1.0 - c);
}

void save_checkpoint(std::ostream& out, const ParamVector& params) {
  out << "ratiolab-checkpoint v1\n";
  out << "slices " << params.layout().count() << "\n";
  for (const ParamSlice& s : params.layout().slices()) {
    out << "slice " << s.name << " " << s.rows << " " << s.cols << "\n";
  }
  out << "values " << params.size() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", params.values()[i]);
    out << buf << "\n";
  }
}

void save_checkpoint(const std::string& path, const ParamVector& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  save_checkpoint(out, params);
}

ParamVector load_checkpoint(std::istream& in) {
  std::string header;
  std::getline(in, header);
  if (header != "ratiolab-checkpoint v1") {
    throw std::runtime_error("load_checkpoint: unrecognized header '" + header + "'");
  }
  std::string word;
  std::size_t n_slices = 0;
  in >> word >> n_slices;
  if (word != "slices") throw std::runtime_error("load_checkpoint: malformed slice count");
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> shapes;
  for (std::size_t i = 0; i < n_slices; ++i) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    in >> word >> name >> rows >> cols;
    if (word != "slice") throw std::runtime_error("load_checkpoint: malformed slice line");
    shapes.push_back({name, {rows, cols}});
  }
  Eigen::Index n_values = 0;
  in >> word >> n_values;
  if (word != "values") throw std::runtime_error("load_checkpoint: malformed value count");
  Eigen::VectorXd values(n_values);
  for (Eigen::Index i = 0; i < n_values; ++i) {
    if (!(in >> values[i])) throw std::runtime_error("load_checkpoint: truncated values");
  }
  return ParamVector(ParamLayout::build(std::move(shapes)), std::move(values));
}

ParamVector load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace ratiolab
