#include "ratiolab/tape.hpp"

#include <cmath>

namespace ratiolab::ad {

namespace {

double stable_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Eigen::MatrixXd& Var::value() const { return tape_->value_of(id_); }

double Var::scalar() const {
  const Eigen::MatrixXd& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::logic_error("Var::scalar: node is not 1x1");
  }
  return v(0, 0);
}

void Tape::check_same_tape(Var v) const {
  if (v.tape() != this) {
    throw std::logic_error("Tape: operands must belong to the same tape");
  }
}

Var Tape::leaf(Eigen::MatrixXd value, bool requires_grad) {
  Node n;
  n.op = Op::leaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
}

void Tape::set_value(Var leaf, const Eigen::MatrixXd& value) {
  check_same_tape(leaf);
  Node& n = nodes_[leaf.id()];
  if (n.op != Op::leaf) throw std::logic_error("Tape::set_value: node is not a leaf");
  if (n.value.rows() != value.rows() || n.value.cols() != value.cols()) {
    throw std::logic_error("Tape::set_value: shape mismatch");
  }
  n.value = value;
  stale_ = true;
}

Var Tape::emit(Op op, Var a, Var b, double attr0, double attr1) {
  if (stale_) throw std::logic_error("Tape: replay() before recording new nodes");
  check_same_tape(a);
  if (b.valid()) check_same_tape(b);
  Node n;
  n.op = op;
  n.a = a.id();
  n.b = b.valid() ? b.id() : -1;
  n.attr0 = attr0;
  n.attr1 = attr1;
  nodes_.push_back(std::move(n));
  const auto id = static_cast<std::int32_t>(nodes_.size() - 1);
  compute(id);
  return Var(this, id);
}

void Tape::replay() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op != Op::leaf) compute(static_cast<std::int32_t>(i));
  }
  stale_ = false;
}

void Tape::compute(std::int32_t id) {
  Node& n = nodes_[id];
  const auto A = [&]() -> const Eigen::MatrixXd& { return nodes_[n.a].value; };
  const auto B = [&]() -> const Eigen::MatrixXd& { return nodes_[n.b].value; };
  auto require_same_shape = [&]() {
    if (A().rows() != B().rows() || A().cols() != B().cols()) {
      throw std::logic_error("Tape: elementwise shape mismatch at node " + std::to_string(id));
    }
  };
  switch (n.op) {
    case Op::leaf:
      break;
    case Op::add:
      require_same_shape();
      n.value = A() + B();
      break;
    case Op::sub:
      require_same_shape();
      n.value = A() - B();
      break;
    case Op::mul:
      require_same_shape();
      n.value = A().cwiseProduct(B());
      break;
    case Op::div:
      require_same_shape();
      if ((B().array() == 0.0).any()) {
        throw TapeDomainError(id, "division by zero");
      }
      n.value = A().cwiseQuotient(B());
      break;
    case Op::matmul:
      if (A().cols() != B().rows()) {
        throw std::logic_error("Tape: matmul inner dimension mismatch at node " +
                               std::to_string(id));
      }
      n.value.noalias() = A() * B();
      break;
    case Op::transpose:
      n.value = A().transpose();
      break;
    case Op::add_rowvec:
      if (n.b < 0 || B().rows() != 1 || B().cols() != A().cols()) {
        throw std::logic_error("Tape: add_rowvec expects a matching 1 x m row vector");
      }
      n.value = A().rowwise() + B().row(0);
      break;
    case Op::neg:
      n.value = -A();
      break;
    case Op::exp_fn:
      n.value = A().array().exp();
      break;
    case Op::log_fn:
      if ((A().array() <= 0.0).any()) {
        throw TapeDomainError(id, "log of non-positive value");
      }
      n.value = A().array().log();
      break;
    case Op::tanh_fn:
      n.value = A().array().tanh();
      break;
    case Op::relu_fn:
      n.value = A().cwiseMax(0.0);
      break;
    case Op::sigmoid_fn:
      n.value = A().unaryExpr([](double x) { return stable_sigmoid(x); });
      break;
    case Op::softplus_fn:
      n.value = A().unaryExpr([](double x) { return stable_softplus(x); });
      break;
    case Op::square_fn:
      n.value = A().array().square();
      break;
    case Op::sqrt_fn:
      if ((A().array() < 0.0).any()) {
        throw TapeDomainError(id, "sqrt of negative value");
      }
      n.value = A().array().sqrt();
      break;
    case Op::clamp_fn: {
      const long before = (A().array() < n.attr0 || A().array() > n.attr1).count();
      clamp_events_ += before;
      n.value = A().cwiseMax(n.attr0).cwiseMin(n.attr1);
      break;
    }
    case Op::scal_add:
      n.value = A().array() + n.attr0;
      break;
    case Op::scal_mul:
      n.value = A() * n.attr0;
      break;
    case Op::scal_rsub:
      n.value = n.attr0 - A().array();
      break;
    case Op::scal_rdiv:
      if ((A().array() == 0.0).any()) {
        throw TapeDomainError(id, "division by zero");
      }
      n.value = n.attr0 / A().array();
      break;
    case Op::mean_all:
      n.value = Eigen::MatrixXd::Constant(1, 1, A().mean());
      break;
    case Op::sum_all:
      n.value = Eigen::MatrixXd::Constant(1, 1, A().sum());
      break;
    case Op::row_sum:
      n.value = A().rowwise().sum();
      break;
    case Op::col_sum:
      n.value = A().colwise().sum();
      break;
    case Op::col_mean:
      n.value = A().colwise().mean();
      break;
  }
}

void Tape::add_adjoint(std::int32_t id, const Eigen::MatrixXd& contribution) {
  Node& n = nodes_[id];
  if (!n.adj_live) {
    n.adjoint = contribution;
    n.adj_live = true;
  } else {
    n.adjoint += contribution;
  }
}

void Tape::backward(Var output) {
  check_same_tape(output);
  if (stale_) throw std::logic_error("Tape::backward: forward pass is stale; call replay()");
  const Eigen::MatrixXd& out = nodes_[output.id()].value;
  if (out.rows() != 1 || out.cols() != 1) {
    throw std::logic_error("Tape::backward: output must be a 1x1 scalar");
  }
  for (Node& n : nodes_) n.adj_live = false;
  add_adjoint(output.id(), Eigen::MatrixXd::Constant(1, 1, 1.0));

  for (std::int32_t id = output.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.adj_live || n.op == Op::leaf) continue;
    const Eigen::MatrixXd& g = n.adjoint;
    const Eigen::MatrixXd& a = nodes_[n.a].value;
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::add:
        add_adjoint(n.a, g);
        add_adjoint(n.b, g);
        break;
      case Op::sub:
        add_adjoint(n.a, g);
        add_adjoint(n.b, -g);
        break;
      case Op::mul:
        add_adjoint(n.a, g.cwiseProduct(nodes_[n.b].value));
        add_adjoint(n.b, g.cwiseProduct(a));
        break;
      case Op::div: {
        const Eigen::MatrixXd& b = nodes_[n.b].value;
        add_adjoint(n.a, g.cwiseQuotient(b));
        add_adjoint(n.b, -(g.cwiseProduct(n.value).cwiseQuotient(b)));
        break;
      }
      case Op::matmul:
        add_adjoint(n.a, g * nodes_[n.b].value.transpose());
        add_adjoint(n.b, a.transpose() * g);
        break;
      case Op::transpose:
        add_adjoint(n.a, g.transpose());
        break;
      case Op::add_rowvec:
        add_adjoint(n.a, g);
        add_adjoint(n.b, g.colwise().sum());
        break;
      case Op::neg:
        add_adjoint(n.a, -g);
        break;
      case Op::exp_fn:
        add_adjoint(n.a, g.cwiseProduct(n.value));
        break;
      case Op::log_fn:
        add_adjoint(n.a, g.cwiseQuotient(a));
        break;
      case Op::tanh_fn:
        add_adjoint(n.a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Op::relu_fn:
        // Subgradient 0 at the origin.
        add_adjoint(n.a, (g.array() * (a.array() > 0.0).cast<double>()).matrix());
        break;
      case Op::sigmoid_fn:
        add_adjoint(n.a, (g.array() * n.value.array() * (1.0 - n.value.array())).matrix());
        break;
      case Op::softplus_fn:
        add_adjoint(
            n.a, (g.array() * a.unaryExpr([](double x) { return stable_sigmoid(x); }).array())
                     .matrix());
        break;
      case Op::square_fn:
        add_adjoint(n.a, (2.0 * g.array() * a.array()).matrix());
        break;
      case Op::sqrt_fn:
        add_adjoint(n.a, (g.array() / (2.0 * n.value.array())).matrix());
        break;
      case Op::clamp_fn:
        add_adjoint(n.a, (g.array() *
                          (a.array() >= n.attr0 && a.array() <= n.attr1).cast<double>())
                             .matrix());
        break;
      case Op::scal_add:
        add_adjoint(n.a, g);
        break;
      case Op::scal_mul:
        add_adjoint(n.a, g * n.attr0);
        break;
      case Op::scal_rsub:
        add_adjoint(n.a, -g);
        break;
      case Op::scal_rdiv:
        add_adjoint(n.a, -(g.array() * n.value.array() / a.array()).matrix());
        break;
      case Op::mean_all:
        add_adjoint(n.a, Eigen::MatrixXd::Constant(a.rows(), a.cols(),
                                                   g(0, 0) / static_cast<double>(a.size())));
        break;
      case Op::sum_all:
        add_adjoint(n.a, Eigen::MatrixXd::Constant(a.rows(), a.cols(), g(0, 0)));
        break;
      case Op::row_sum:
        add_adjoint(n.a, g.replicate(1, a.cols()));
        break;
      case Op::col_sum:
        add_adjoint(n.a, g.replicate(a.rows(), 1));
        break;
      case Op::col_mean:
        add_adjoint(n.a, g.replicate(a.rows(), 1) / static_cast<double>(a.rows()));
        break;
    }
  }

  // Leaves the output does not depend on get an explicit zero gradient.
  for (Node& n : nodes_) {
    if (n.op == Op::leaf && n.requires_grad && !n.adj_live) {
      n.adjoint = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
      n.adj_live = true;
    }
  }
  backward_ran_ = true;
}

const Eigen::MatrixXd& Tape::grad(Var leaf) const {
  check_same_tape(leaf);
  const Node& n = nodes_[leaf.id()];
  if (!n.requires_grad) {
    throw std::logic_error("Tape::grad: node was not created with requires_grad");
  }
  if (!backward_ran_ || !n.adj_live) {
    throw std::logic_error("Tape::grad: run backward() first");
  }
  return n.adjoint;
}

Var operator+(Var a, Var b) { return a.tape()->emit(Op::add, a, b); }
Var operator-(Var a, Var b) { return a.tape()->emit(Op::sub, a, b); }
Var operator*(Var a, Var b) { return a.tape()->emit(Op::mul, a, b); }
Var operator/(Var a, Var b) { return a.tape()->emit(Op::div, a, b); }
Var operator-(Var a) { return a.tape()->emit(Op::neg, a, Var()); }

Var operator+(Var a, double c) { return a.tape()->emit(Op::scal_add, a, Var(), c); }
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return a.tape()->emit(Op::scal_rsub, a, Var(), c); }
Var operator*(Var a, double c) { return a.tape()->emit(Op::scal_mul, a, Var(), c); }
Var operator*(double c, Var a) { return a * c; }
Var operator/(Var a, double c) { return a * (1.0 / c); }
Var operator/(double c, Var a) { return a.tape()->emit(Op::scal_rdiv, a, Var(), c); }

Var matmul(Var a, Var b) { return a.tape()->emit(Op::matmul, a, b); }
Var transpose(Var a) { return a.tape()->emit(Op::transpose, a, Var()); }
Var add_rowvec(Var m, Var row) { return m.tape()->emit(Op::add_rowvec, m, row); }

Var exp(Var a) { return a.tape()->emit(Op::exp_fn, a, Var()); }
Var log(Var a) { return a.tape()->emit(Op::log_fn, a, Var()); }
Var tanh(Var a) { return a.tape()->emit(Op::tanh_fn, a, Var()); }
Var relu(Var a) { return a.tape()->emit(Op::relu_fn, a, Var()); }
Var sigmoid(Var a) { return a.tape()->emit(Op::sigmoid_fn, a, Var()); }
Var softplus(Var a) { return a.tape()->emit(Op::softplus_fn, a, Var()); }
Var square(Var a) { return a.tape()->emit(Op::square_fn, a, Var()); }
Var sqrt(Var a) { return a.tape()->emit(Op::sqrt_fn, a, Var()); }
Var clamp(Var a, double lo, double hi) { return a.tape()->emit(Op::clamp_fn, a, Var(), lo, hi); }

Var mean(Var a) { return a.tape()->emit(Op::mean_all, a, Var()); }
Var sum(Var a) { return a.tape()->emit(Op::sum_all, a, Var()); }
Var row_sum(Var a) { return a.tape()->emit(Op::row_sum, a, Var()); }
Var col_sum(Var a) { return a.tape()->emit(Op::col_sum, a, Var()); }
Var col_mean(Var a) { return a.tape()->emit(Op::col_mean, a, Var()); }

Var pow_int(Var a, int k) {
  if (k < 1) throw std::invalid_argument("pow_int: exponent must be >= 1");
  Var out = a;
  for (int i = 1; i < k; ++i) out = out * a;
  return out;
}

}  // namespace ratiolab::ad
