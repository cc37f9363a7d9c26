// Reverse-mode automatic differentiation over small dense computations.
//
// A Tape records matrix-valued nodes eagerly (define-by-run). Leaf values can
// be overwritten afterwards and the whole tape replayed without reallocating,
// which is what the training loop and finite-difference checks do. backward()
// accumulates exact adjoints of a scalar output with respect to every leaf
// created with requires_grad.
//
// Supported primitives: elementwise add/sub/mul/div, matmul, transpose,
// row-vector broadcast add, exp, log, tanh, relu, sigmoid, softplus, square,
// sqrt, clamp, scalar broadcasts, and mean/sum reductions (full, row, column).
// Everything is double precision.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratiolab::ad {

class Tape;

// Lightweight handle to a tape node.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::int32_t id) : tape_(tape), id_(id) {}

  const Eigen::MatrixXd& value() const;
  double scalar() const;  // requires 1x1
  Tape* tape() const { return tape_; }
  std::int32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
};

// Raised on log/div/sqrt domain violations; carries the offending node.
struct TapeDomainError : std::runtime_error {
  TapeDomainError(std::int32_t node, const std::string& what)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_id(node) {}
  std::int32_t node_id;
};

enum class Op : std::uint8_t {
  leaf,
  add, sub, mul, div, matmul, transpose, add_rowvec,
  neg, exp_fn, log_fn, tanh_fn, relu_fn, sigmoid_fn, softplus_fn,
  square_fn, sqrt_fn, clamp_fn,
  scal_add, scal_mul, scal_rsub, scal_rdiv,
  mean_all, sum_all, row_sum, col_sum, col_mean,
};

class Tape {
 public:
  // Settable input node. Only requires_grad leaves receive adjoints.
  Var leaf(Eigen::MatrixXd value, bool requires_grad = true);
  Var constant(Eigen::MatrixXd value) { return leaf(std::move(value), false); }
  Var scalar(double v) { return constant(Eigen::MatrixXd::Constant(1, 1, v)); }

  // Overwrites a leaf's value (shape must match); the tape is stale until
  // replay() is called.
  void set_value(Var leaf, const Eigen::MatrixXd& value);
  // Recomputes every non-leaf node in recording order.
  void replay();

  // Reverse pass from a 1x1 output. Results readable via grad().
  void backward(Var output);
  const Eigen::MatrixXd& grad(Var leaf) const;

  const Eigen::MatrixXd& value_of(std::int32_t id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  // Entries clamped by clamp() nodes since construction or the last reset;
  // saturation diagnostics for training reports.
  long clamp_events() const { return clamp_events_; }
  void reset_clamp_events() { clamp_events_ = 0; }

  // Builder entry points (used by the free functions below).
  Var emit(Op op, Var a, Var b, double attr0 = 0.0, double attr1 = 0.0);

 private:
  struct Node {
    Op op;
    bool requires_grad = false;
    std::int32_t a = -1, b = -1;
    double attr0 = 0.0, attr1 = 0.0;
    Eigen::MatrixXd value;
    Eigen::MatrixXd adjoint;
    bool adj_live = false;
  };

  void compute(std::int32_t id);
  void check_same_tape(Var v) const;
  void add_adjoint(std::int32_t id, const Eigen::MatrixXd& contribution);

  std::vector<Node> nodes_;
  bool stale_ = false;
  bool backward_ran_ = false;
  long clamp_events_ = 0;
};

// Elementwise arithmetic; shapes must match exactly.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);

// Scalar broadcasts.
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);
// (n x m) + broadcast of a (1 x m) row vector.
Var add_rowvec(Var m, Var row);

Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var square(Var a);
Var sqrt(Var a);
Var clamp(Var a, double lo, double hi);

Var mean(Var a);      // 1x1
Var sum(Var a);       // 1x1
Var row_sum(Var a);   // n x 1
Var col_sum(Var a);   // 1 x m
Var col_mean(Var a);  // 1 x m

// x^k for small integer k >= 1 by repeated multiplication.
Var pow_int(Var a, int k);

}  // namespace ratiolab::ad
