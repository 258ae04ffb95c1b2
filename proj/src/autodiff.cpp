#include "pgqr/autodiff.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pgqr::ad {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void shape_error(Op op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument("autodiff: shape mismatch in " + std::string(op_name(op)) + ": " +
                              shape_str(a) + " vs " + shape_str(b));
}

bool is_scalar(const Matrix& m) { return m.rows() == 1 && m.cols() == 1; }

// Sum rows of g into a 1xC row (the adjoint of row broadcasting).
Matrix sum_rows(const Matrix& g) { return g.colwise().sum(); }

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::Tanh: return "tanh";
    case Op::Relu: return "relu";
    case Op::Softplus: return "softplus";
    case Op::Abs: return "abs";
    case Op::Log: return "log";
    case Op::Mean: return "mean";
  }
  return "unknown";
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite()) throw std::domain_error("autodiff: leaf value is not finite");
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::scalar(double v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) throw std::out_of_range("autodiff: Var does not belong to this tape");
  return nodes_[v.index];
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0 && n.value.size() != 0)
    throw std::logic_error("autodiff: grad() requested before backward()");
  return n.grad;
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(Op op, std::span<const Var> inputs, double constant) {
  const bool binary_op = op == Op::MatMul || op == Op::Add || op == Op::Sub || op == Op::Mul;
  const std::size_t expected = op == Op::Leaf ? 0 : (binary_op ? 2 : 1);
  if (op == Op::Leaf) throw std::invalid_argument("autodiff: use leaf() to create leaves");
  if (inputs.size() != expected)
    throw std::invalid_argument("autodiff: wrong input count for " + std::string(op_name(op)));

  Node n;
  n.op = op;
  n.arity = static_cast<int>(expected);
  n.constant = constant;
  n.lhs = inputs[0].index;
  n.rhs = binary_op ? inputs[1].index : 0;
  const Matrix& a = node(inputs[0]).value;
  n.requires_grad = node(inputs[0]).requires_grad;
  if (binary_op) n.requires_grad = n.requires_grad || node(inputs[1]).requires_grad;

  switch (op) {
    case Op::MatMul: {
      const Matrix& b = node(inputs[1]).value;
      if (a.cols() != b.rows()) shape_error(op, a, b);
      n.value.noalias() = a * b;
      break;
    }
    case Op::Add: {
      const Matrix& b = node(inputs[1]).value;
      if (a.rows() == b.rows() && a.cols() == b.cols()) {
        n.value = a + b;
      } else if (is_scalar(b)) {
        n.value = a.array() + b(0, 0);
      } else if (b.rows() == 1 && b.cols() == a.cols()) {
        n.value = a.rowwise() + b.row(0);
      } else {
        shape_error(op, a, b);
      }
      break;
    }
    case Op::Sub: {
      const Matrix& b = node(inputs[1]).value;
      if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
      n.value = a - b;
      break;
    }
    case Op::Mul: {
      const Matrix& b = node(inputs[1]).value;
      if (a.rows() == b.rows() && a.cols() == b.cols()) {
        n.value = a.cwiseProduct(b);
      } else if (is_scalar(b)) {
        n.value = a * b(0, 0);
      } else {
        shape_error(op, a, b);
      }
      break;
    }
    case Op::Scale: n.value = a * constant; break;
    case Op::AddScalar: n.value = a.array() + constant; break;
    case Op::Tanh: n.value = a.array().tanh(); break;
    case Op::Relu: n.value = a.cwiseMax(0.0); break;
    case Op::Softplus: n.value = a.unaryExpr([](double x) { return pgqr::ad::softplus(x); }); break;
    case Op::Abs: n.value = a.cwiseAbs(); break;
    case Op::Log:
      if ((a.array() <= 0.0).any()) throw std::domain_error("autodiff: log of non-positive argument");
      n.value = a.array().log();
      break;
    case Op::Mean:
      if (a.size() == 0) throw std::invalid_argument("autodiff: mean of empty tensor");
      n.value = Matrix::Constant(1, 1, a.mean());
      break;
    case Op::Leaf: break;
  }
  if (!n.value.allFinite())
    throw std::domain_error("autodiff: non-finite value produced by " + std::string(op_name(op)));
  return push(std::move(n));
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (!is_scalar(r.value)) throw std::invalid_argument("autodiff: backward root must be 1x1, got " + shape_str(r.value));
  for (Node& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
  nodes_[root.index].grad(0, 0) = 1.0;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (nodes_[i].requires_grad && nodes_[i].op != Op::Leaf) propagate(i);
  }
}

void Tape::propagate(std::size_t i) {
  Node& n = nodes_[i];
  const Matrix& g = n.grad;
  Node& a = nodes_[n.lhs];
  Node* b = n.arity == 2 ? &nodes_[n.rhs] : nullptr;

  switch (n.op) {
    case Op::MatMul:
      if (a.requires_grad) a.grad.noalias() += g * b->value.transpose();
      if (b->requires_grad) b->grad.noalias() += a.value.transpose() * g;
      break;
    case Op::Add:
      if (a.requires_grad) a.grad += g;
      if (b->requires_grad) {
        if (b->value.rows() == g.rows() && b->value.cols() == g.cols())
          b->grad += g;
        else if (is_scalar(b->value))
          b->grad(0, 0) += g.sum();
        else
          b->grad += sum_rows(g);
      }
      break;
    case Op::Sub:
      if (a.requires_grad) a.grad += g;
      if (b->requires_grad) b->grad -= g;
      break;
    case Op::Mul:
      if (b->value.rows() == g.rows() && b->value.cols() == g.cols()) {
        if (a.requires_grad) a.grad += g.cwiseProduct(b->value);
        if (b->requires_grad) b->grad += g.cwiseProduct(a.value);
      } else {
        if (a.requires_grad) a.grad += g * b->value(0, 0);
        if (b->requires_grad) b->grad(0, 0) += g.cwiseProduct(a.value).sum();
      }
      break;
    case Op::Scale:
      if (a.requires_grad) a.grad += g * n.constant;
      break;
    case Op::AddScalar:
      if (a.requires_grad) a.grad += g;
      break;
    case Op::Tanh:
      if (a.requires_grad) a.grad.array() += g.array() * (1.0 - n.value.array().square());
      break;
    case Op::Relu:
      // Subgradient 0 at exactly 0.
      if (a.requires_grad) a.grad.array() += g.array() * (a.value.array() > 0.0).cast<double>();
      break;
    case Op::Softplus:
      if (a.requires_grad)
        a.grad.array() += g.array() * a.value.unaryExpr([](double x) { return sigmoid(x); }).array();
      break;
    case Op::Abs:
      // Subgradient 0 at exactly 0.
      if (a.requires_grad) {
        a.grad.array() += g.array() * a.value.array().unaryExpr([](double x) {
          return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        });
      }
      break;
    case Op::Log:
      if (a.requires_grad) a.grad.array() += g.array() / a.value.array();
      break;
    case Op::Mean:
      if (a.requires_grad) a.grad.array() += g(0, 0) / static_cast<double>(a.value.size());
      break;
    case Op::Leaf: break;
  }
}

}  // namespace pgqr::ad
