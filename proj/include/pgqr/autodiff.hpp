#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace pgqr {

/// Dense row-major real matrix. Every tensor in the library is one of these.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace ad {

/// Handle to a node recorded on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::size_t index = 0;
  friend bool operator==(Var, Var) = default;
};

enum class Op {
  Leaf,
  MatMul,
  Add,   // same shape, 1x1 scalar broadcast, or 1xC row broadcast on the rhs
  Sub,   // same shape only
  Mul,   // elementwise, same shape or 1x1 scalar broadcast on the rhs
  Scale, // multiply by a compile-time constant
  AddScalar,
  Tanh,
  Relu,
  Softplus,
  Abs,
  Log,
  Mean,
};

std::string_view op_name(Op op);

/// Numerically stable softplus: max(x,0) + log1p(exp(-|x|)).
double softplus(double x);
/// Logistic sigmoid, the derivative of softplus.
double sigmoid(double x);

/// Records primitive operations in topological order and runs reverse-mode
/// accumulation over them. Single owner; distinct tapes share nothing.
class Tape {
 public:
  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }
  Var scalar(double v, bool requires_grad = false);

  /// Generic entry point. `constant` is only read by Scale and AddScalar.
  Var record(Op op, std::span<const Var> inputs, double constant = 0.0);

  Var matmul(Var a, Var b) { return binary(Op::MatMul, a, b); }
  Var add(Var a, Var b) { return binary(Op::Add, a, b); }
  Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
  Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }
  Var scale(Var a, double s) { return unary(Op::Scale, a, s); }
  Var add_scalar(Var a, double s) { return unary(Op::AddScalar, a, s); }
  Var tanh(Var a) { return unary(Op::Tanh, a); }
  Var relu(Var a) { return unary(Op::Relu, a); }
  Var softplus(Var a) { return unary(Op::Softplus, a); }
  Var abs(Var a) { return unary(Op::Abs, a); }
  Var log(Var a) { return unary(Op::Log, a); }
  Var mean(Var a) { return unary(Op::Mean, a); }

  /// Reverse sweep from a 1x1 root. Gradients of every node reachable from
  /// the root are accumulated; earlier gradients are discarded first.
  void backward(Var root);

  const Matrix& value(Var v) const;
  /// Gradient of the last backward root with respect to `v`. Zero matrix of
  /// matching shape for nodes the root does not depend on.
  const Matrix& grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Op op = Op::Leaf;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    int arity = 0;
    double constant = 0.0;
    bool requires_grad = false;
    Matrix value;
    Matrix grad;
  };

  Var unary(Op op, Var a, double constant = 0.0) {
    const Var in[] = {a};
    return record(op, in, constant);
  }
  Var binary(Op op, Var a, Var b) {
    const Var in[] = {a, b};
    return record(op, in);
  }
  const Node& node(Var v) const;
  Var push(Node n);
  void propagate(std::size_t i);

  std::vector<Node> nodes_;
};

}  // namespace ad
}  // namespace pgqr
