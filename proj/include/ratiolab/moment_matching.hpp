// Moment-matching objectives: squared distance between feature means under a
// chosen test statistic, and kernel maximum mean discrepancy (biased and
// unbiased estimators) with rbf / polynomial kernels and median-heuristic
// bandwidth selection.

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

#include "ratiolab/tape.hpp"

namespace ratiolab {

// Feature map s(x) whose empirical means are matched between real and
// generated batches.
struct TestStatistic {
  enum class Kind { raw_moments, fixed_features };

  Kind kind = Kind::raw_moments;
  // raw_moments: s(x) concatenates elementwise powers x^1 .. x^order.
  int order = 1;
  // fixed_features: arbitrary row-wise feature map (evaluation only; not
  // differentiable through the tape).
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> features;
  Eigen::Index feature_dim = 0;

  static TestStatistic raw(int order);
  static TestStatistic fixed(std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> features,
                             Eigen::Index feature_dim);

  Eigen::Index output_dim(Eigen::Index data_dim) const;
  // rows of evaluate() are s(x_i)
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& x) const;
};

struct KernelSpec {
  enum class Kind { rbf, polynomial };

  Kind kind = Kind::rbf;
  double sigma = 1.0;   // rbf: k(x,y) = exp(-|x-y|^2 / (2 sigma^2))
  int degree = 2;       // polynomial: k(x,y) = (x.y + offset)^degree
  double offset = 1.0;

  static KernelSpec rbf(double sigma);
  static KernelSpec polynomial(int degree, double offset);
};

// Kernel selection strings: "rbf:<sigma>" with a positive bandwidth,
// "rbf:median" to defer bandwidth to the median heuristic at startup, or
// "poly:<degree>:<offset>".
struct KernelChoice {
  KernelSpec spec;
  bool median = false;  // spec.sigma is a placeholder until resolved
};
KernelChoice parse_kernel(const std::string& text);
std::string kernel_name(const KernelChoice& choice);

Eigen::MatrixXd gram(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y);

// | mean_rows(s(X_p)) - mean_rows(s(X_gen)) |^2
double moment_loss(const TestStatistic& stat, const Eigen::MatrixXd& x_p,
                   const Eigen::MatrixXd& x_gen);
// Tape version (raw_moments only); differentiable through both batches.
ad::Var moment_loss(const TestStatistic& stat, ad::Var x_p, ad::Var x_gen);

// mean k(X,X) + mean k(Y,Y) - 2 mean k(X,Y), diagonals included; >= 0 for
// positive-definite kernels and exactly 0 at X == Y.
double mmd2_biased(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& y);
ad::Var mmd2_biased(const KernelSpec& kernel, ad::Var x, ad::Var y);

// Within-set means exclude the diagonal, making the estimator unbiased at the
// cost of possible negative values; needs at least two rows per batch.
double mmd2_unbiased(const KernelSpec& kernel, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& y);

// Median pairwise Euclidean distance of the pooled rows of X and Y, floored
// at 1e-6 (sets *floored when the floor binds, e.g. all points identical).
double median_heuristic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                        bool* floored = nullptr);

}  // namespace ratiolab
