#include "ratiolab/moment_matching.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace ratiolab {

namespace {

void check_pair(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const char* fn) {
  if (x.rows() == 0 || y.rows() == 0) {
    throw std::invalid_argument(std::string(fn) + ": empty batch");
  }
  if (x.cols() != y.cols()) {
    throw std::invalid_argument(std::string(fn) + ": batch dimensions differ");
  }
}

Eigen::MatrixXd sq_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const Eigen::VectorXd sx = x.rowwise().squaredNorm();
  const Eigen::VectorXd sy = y.rowwise().squaredNorm();
  Eigen::MatrixXd d = (-2.0 * x * y.transpose()).colwise() + sx;
  d.rowwise() += sy.transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

TestStatistic TestStatistic::raw(int order) {
  if (order < 1) throw std::invalid_argument("TestStatistic::raw: order must be >= 1");
  TestStatistic s;
  s.kind = Kind::raw_moments;
  s.order = order;
  return s;
}

TestStatistic TestStatistic::fixed(
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> features,
    Eigen::Index feature_dim) {
  if (!features) throw std::invalid_argument("TestStatistic::fixed: empty feature map");
  if (feature_dim < 1) throw std::invalid_argument("TestStatistic::fixed: feature_dim must be >= 1");
  TestStatistic s;
  s.kind = Kind::fixed_features;
  s.features = std::move(features);
  s.feature_dim = feature_dim;
  return s;
}

Eigen::Index TestStatistic::output_dim(Eigen::Index data_dim) const {
  return kind == Kind::raw_moments ? data_dim * order : feature_dim;
}

Eigen::MatrixXd TestStatistic::evaluate(const Eigen::MatrixXd& x) const {
  if (kind == Kind::fixed_features) {
    Eigen::MatrixXd out = features(x);
    if (out.rows() != x.rows() || out.cols() != feature_dim) {
      throw std::runtime_error("TestStatistic: feature map returned wrong shape");
    }
    if (!out.allFinite()) {
      throw std::runtime_error("TestStatistic: feature map returned non-finite values");
    }
    return out;
  }
  Eigen::MatrixXd out(x.rows(), x.cols() * order);
  Eigen::MatrixXd power = x;
  for (int m = 0; m < order; ++m) {
    out.middleCols(m * x.cols(), x.cols()) = power;
    if (m + 1 < order) power = power.cwiseProduct(x);
  }
  return out;
}

KernelSpec KernelSpec::rbf(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("KernelSpec::rbf: sigma must be positive");
  KernelSpec k;
  k.kind = Kind::rbf;
  k.sigma = sigma;
  return k;
}

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  if (degree < 1) throw std::invalid_argument("KernelSpec::polynomial: degree must be >= 1");
  if (offset < 0.0) throw std::invalid_argument("KernelSpec::polynomial: offset must be >= 0");
  KernelSpec k;
  k.kind = Kind::polynomial;
  k.degree = degree;
  k.offset = offset;
  return k;
}

KernelChoice parse_kernel(const std::string& text) {
  const auto bad = [&text]() {
    return std::invalid_argument("unknown kernel '" + text +
                                 "' (expected rbf:<sigma>, rbf:median, or poly:<degree>:<offset>)");
  };
  if (text.rfind("rbf:", 0) == 0) {
    const std::string arg = text.substr(4);
    KernelChoice choice;
    if (arg == "median") {
      choice.spec = KernelSpec::rbf(1.0);
      choice.median = true;
      return choice;
    }
    double sigma = 0.0;
    try {
      std::size_t used = 0;
      sigma = std::stod(arg, &used);
      if (used != arg.size()) throw bad();
    } catch (const std::exception&) {
      throw bad();
    }
    choice.spec = KernelSpec::rbf(sigma);
    return choice;
  }
  if (text.rfind("poly:", 0) == 0) {
    const std::string rest = text.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw bad();
    int degree = 0;
    double offset = 0.0;
    try {
      std::size_t used = 0;
      degree = std::stoi(rest.substr(0, colon), &used);
      if (used != colon) throw bad();
      const std::string off = rest.substr(colon + 1);
      offset = std::stod(off, &used);
      if (used != off.size()) throw bad();
    } catch (const std::exception&) {
      throw bad();
    }
    return {KernelSpec::polynomial(degree, offset), false};
  }
  throw bad();
}

std::string kernel_name(const KernelChoice& choice) {
  if (choice.spec.kind == KernelSpec::Kind::rbf) {
    return choice.median ? "rbf:median" : "rbf:" + std::to_string(choice.spec.sigma);
  }
  return "poly:" + std::to_string(choice.spec.degree) + ":" + std::to_string(choice.spec.offset);
}

Eigen::MatrixXd gram(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y) {
  check_pair(x, y, "gram");
  if (kernel.kind == KernelSpec::Kind::rbf) {
    const double scale = -1.0 / (2.0 * kernel.sigma * kernel.sigma);
    return (sq_distances(x, y) * scale).array().exp();
  }
  Eigen::ArrayXXd base = (x * y.transpose()).array() + kernel.offset;
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Ones(base.rows(), base.cols());
  for (int i = 0; i < kernel.degree; ++i) out *= base;
  return out.matrix();
}

double moment_loss(const TestStatistic& stat, const Eigen::MatrixXd& x_p,
                   const Eigen::MatrixXd& x_gen) {
  check_pair(x_p, x_gen, "moment_loss");
  const Eigen::RowVectorXd mp = stat.evaluate(x_p).colwise().mean();
  const Eigen::RowVectorXd mg = stat.evaluate(x_gen).colwise().mean();
  return (mp - mg).squaredNorm();
}

ad::Var moment_loss(const TestStatistic& stat, ad::Var x_p, ad::Var x_gen) {
  if (stat.kind != TestStatistic::Kind::raw_moments) {
    throw std::invalid_argument("moment_loss: fixed feature maps are evaluation-only");
  }
  if (x_p.value().cols() != x_gen.value().cols()) {
    throw std::invalid_argument("moment_loss: batch dimensions differ");
  }
  ad::Var total = x_p.tape()->scalar(0.0);
  ad::Var pp = x_p;
  ad::Var pg = x_gen;
  for (int m = 1; m <= stat.order; ++m) {
    ad::Var diff = ad::col_mean(pp) - ad::col_mean(pg);
    total = total + ad::sum(ad::square(diff));
    if (m < stat.order) {
      pp = pp * x_p;
      pg = pg * x_gen;
    }
  }
  return total;
}

double mmd2_biased(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y) {
  check_pair(x, y, "mmd2_biased");
  return gram(kernel, x, x).mean() + gram(kernel, y, y).mean() -
         2.0 * gram(kernel, x, y).mean();
}

namespace {

// Squared distances on the tape via |x|^2 + |y|^2 - 2 x.y with the row/column
// broadcasts written as products with constant ones matrices.
ad::Var tape_sq_distances(ad::Var x, ad::Var y) {
  ad::Tape* tape = x.tape();
  const auto n = x.value().rows();
  const auto m = y.value().rows();
  ad::Var ones_row = tape->constant(Eigen::MatrixXd::Ones(1, m));
  ad::Var ones_col = tape->constant(Eigen::MatrixXd::Ones(n, 1));
  ad::Var sx = ad::row_sum(ad::square(x));
  ad::Var sy = ad::row_sum(ad::square(y));
  ad::Var cross = ad::matmul(x, ad::transpose(y));
  return ad::matmul(sx, ones_row) + ad::matmul(ones_col, ad::transpose(sy)) - 2.0 * cross;
}

ad::Var tape_gram_mean(const KernelSpec& kernel, ad::Var x, ad::Var y) {
  if (kernel.kind == KernelSpec::Kind::rbf) {
    const double scale = -1.0 / (2.0 * kernel.sigma * kernel.sigma);
    return ad::mean(ad::exp(scale * tape_sq_distances(x, y)));
  }
  ad::Var base = ad::matmul(x, ad::transpose(y)) + kernel.offset;
  return ad::mean(ad::pow_int(base, kernel.degree));
}

}  // namespace

ad::Var mmd2_biased(const KernelSpec& kernel, ad::Var x, ad::Var y) {
  if (x.value().cols() != y.value().cols()) {
    throw std::invalid_argument("mmd2_biased: batch dimensions differ");
  }
  return tape_gram_mean(kernel, x, x) + tape_gram_mean(kernel, y, y) -
         2.0 * tape_gram_mean(kernel, x, y);
}

double mmd2_unbiased(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y) {
  check_pair(x, y, "mmd2_unbiased");
  const auto n = x.rows();
  const auto m = y.rows();
  if (n < 2 || m < 2) {
    throw std::invalid_argument("mmd2_unbiased: needs at least two rows per batch");
  }
  const Eigen::MatrixXd kxx = gram(kernel, x, x);
  const Eigen::MatrixXd kyy = gram(kernel, y, y);
  const double xx = (kxx.sum() - kxx.trace()) / static_cast<double>(n * (n - 1));
  const double yy = (kyy.sum() - kyy.trace()) / static_cast<double>(m * (m - 1));
  return xx + yy - 2.0 * gram(kernel, x, y).mean();
}

double median_heuristic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        bool* floored) {
  check_pair(x, y, "median_heuristic");
  Eigen::MatrixXd pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  const auto n = pooled.rows();
  if (n < 2) throw std::invalid_argument("median_heuristic: pooled size must be >= 2");

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dist.push_back((pooled.row(i) - pooled.row(j)).norm());
    }
  }
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double med = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    med = 0.5 * (med + lower);
  }

  constexpr double kFloor = 1e-6;
  const bool hit_floor = med < kFloor;
  if (floored != nullptr) *floored = hit_floor;
  return hit_floor ? kFloor : med;
}

}  // namespace ratiolab
