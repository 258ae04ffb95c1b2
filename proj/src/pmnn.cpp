#include "pgqr/pmnn.hpp"

#include "pgqr/rng.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace pgqr {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

double apply(Activation a, double x) {
  switch (a) {
    case Activation::Tanh: return std::tanh(x);
    case Activation::Relu: return std::max(x, 0.0);
    case Activation::Identity: return x;
  }
  return x;
}

void PMNNConfig::validate() const {
  if (k1 < 1 || k2 < 1 || width < 1) throw std::invalid_argument("PMNNConfig: k1, k2 and width must be >= 1");
  if (!(lambda_hi >= lambda_lo) || !std::isfinite(lambda_lo) || !std::isfinite(lambda_hi))
    throw std::invalid_argument("PMNNConfig: invalid lambda range");
}

double PMNNConfig::scale_lambda(double lambda) const {
  const double span = lambda_hi - lambda_lo;
  return span > 0.0 ? (lambda - lambda_lo) / span : 0.0;
}

std::vector<Matrix*> PMNNParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& m : gc_raw_weights) out.push_back(&m);
  for (auto& m : gc_biases) out.push_back(&m);
  for (auto& m : guc_weights) out.push_back(&m);
  for (auto& m : guc_biases) out.push_back(&m);
  out.push_back(&f_raw_weights);
  out.push_back(&f_bias);
  return out;
}

std::vector<const Matrix*> PMNNParams::tensors() const {
  std::vector<const Matrix*> out;
  for (Matrix* m : const_cast<PMNNParams*>(this)->tensors()) out.push_back(m);
  return out;
}

std::size_t PMNNParams::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

std::uint64_t PMNNParams::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Matrix* m : tensors()) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m->data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(m->size()) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double positivity_transform(double raw) { return ad::softplus(raw); }

PMNNParams init_params(const PMNNConfig& config, int p, std::uint64_t seed) {
  config.validate();
  if (p < 1) throw std::invalid_argument("init_params: covariate dimension must be >= 1");
  Rng rng(seed);
  const int h = config.width;
  // softplus^-1(0.05); a +-0.5 jitter keeps the mean near 0.05 and breaks symmetry.
  const double raw_center = std::log(std::expm1(0.05));

  auto constrained = [&](int rows, int cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = raw_center + (rng.uniform01() - 0.5);
    return m;
  };
  auto unconstrained = [&](int rows, int cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = bound * (2.0 * rng.uniform01() - 1.0);
    return m;
  };

  PMNNParams params;
  for (int l = 0; l < config.k1; ++l) {
    params.gc_raw_weights.push_back(constrained(l == 0 ? 1 : h, h));
    params.gc_biases.push_back(Matrix::Zero(1, h));
  }
  const int in = p + (config.lambda_as_input ? 1 : 0);
  for (int l = 0; l < config.k2; ++l) {
    params.guc_weights.push_back(unconstrained(l == 0 ? in : h, h));
    params.guc_biases.push_back(Matrix::Zero(1, h));
  }
  params.f_raw_weights = constrained(h, 1);
  params.f_bias = Matrix::Zero(1, 1);
  return params;
}

void check_shapes(const PMNNConfig& config, const PMNNParams& params, int p) {
  const int h = config.width;
  const int in = p + (config.lambda_as_input ? 1 : 0);
  auto expect = [](const Matrix& m, Eigen::Index r, Eigen::Index c, const char* what) {
    if (m.rows() != r || m.cols() != c)
      throw std::invalid_argument(std::string("PMNN parameter shape mismatch: ") + what);
  };
  if (static_cast<int>(params.gc_raw_weights.size()) != config.k1 ||
      static_cast<int>(params.gc_biases.size()) != config.k1 ||
      static_cast<int>(params.guc_weights.size()) != config.k2 ||
      static_cast<int>(params.guc_biases.size()) != config.k2)
    throw std::invalid_argument("PMNN parameter layer count does not match config");
  for (int l = 0; l < config.k1; ++l) {
    expect(params.gc_raw_weights[l], l == 0 ? 1 : h, h, "g_c weight");
    expect(params.gc_biases[l], 1, h, "g_c bias");
  }
  for (int l = 0; l < config.k2; ++l) {
    expect(params.guc_weights[l], l == 0 ? in : h, h, "g_uc weight");
    expect(params.guc_biases[l], 1, h, "g_uc bias");
  }
  expect(params.f_raw_weights, h, 1, "connection weight");
  expect(params.f_bias, 1, 1, "connection bias");
}

BoundParams bind_params(const PMNNParams& params, ad::Tape& tape, bool requires_grad) {
  BoundParams b;
  for (const Matrix* m : params.tensors()) b.raw.push_back(tape.leaf(*m, requires_grad));
  std::size_t i = 0;
  for (std::size_t l = 0; l < params.gc_raw_weights.size(); ++l) b.gc_weights.push_back(tape.softplus(b.raw[i++]));
  for (std::size_t l = 0; l < params.gc_biases.size(); ++l) b.gc_biases.push_back(b.raw[i++]);
  for (std::size_t l = 0; l < params.guc_weights.size(); ++l) b.guc_weights.push_back(b.raw[i++]);
  for (std::size_t l = 0; l < params.guc_biases.size(); ++l) b.guc_biases.push_back(b.raw[i++]);
  b.f_weights = tape.softplus(b.raw[i++]);
  b.f_bias = b.raw[i++];
  return b;
}

namespace {

ad::Var activate(Activation a, ad::Var v, ad::Tape& tape) {
  switch (a) {
    case Activation::Tanh: return tape.tanh(v);
    case Activation::Relu: return tape.relu(v);
    case Activation::Identity: return v;
  }
  return v;
}

ad::Var dense_stack(Activation act, bool activate_last, const std::vector<ad::Var>& weights,
                    const std::vector<ad::Var>& biases, ad::Var h, ad::Tape& tape) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = tape.add(tape.matmul(h, weights[l]), biases[l]);
    if (activate_last || l + 1 < weights.size()) h = activate(act, h, tape);
  }
  return h;
}

}  // namespace

ad::Var quantile_subnet(const PMNNConfig& config, const BoundParams& bound, ad::Var taus, ad::Tape& tape) {
  return dense_stack(config.gc_activation, config.activate_subnet_outputs, bound.gc_weights, bound.gc_biases, taus, tape);
}

ad::Var data_subnet(const PMNNConfig& config, const BoundParams& bound, ad::Var inputs, ad::Tape& tape) {
  return dense_stack(config.guc_activation, config.activate_subnet_outputs, bound.guc_weights, bound.guc_biases, inputs, tape);
}

ad::Var connection(const PMNNConfig& config, const BoundParams& bound, ad::Var summed, ad::Tape& tape) {
  return tape.add(tape.matmul(activate(config.connection_activation, summed, tape), bound.f_weights), bound.f_bias);
}

Matrix network_inputs(const PMNNConfig& config, const Matrix& x, std::span<const double> lambdas) {
  if (!config.lambda_as_input) return x;
  if (static_cast<Eigen::Index>(lambdas.size()) != x.rows())
    throw std::invalid_argument("network_inputs: one lambda per row required");
  Matrix in(x.rows(), x.cols() + 1);
  in.leftCols(x.cols()) = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) in(i, x.cols()) = config.scale_lambda(lambdas[i]);
  return in;
}

ad::Var forward(const PMNNConfig& config, const PMNNParams& params, std::span<const ModelInput> batch,
                ad::Tape& tape) {
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  const Eigen::Index p = batch.front().x.size();
  check_shapes(config, params, static_cast<int>(p));
  Matrix x(batch.size(), p);
  Matrix taus(batch.size(), 1);
  std::vector<double> lambdas(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ModelInput& in = batch[i];
    if (!(in.tau > 0.0 && in.tau < 1.0)) throw std::invalid_argument("forward: tau must lie in (0,1)");
    if (in.x.size() != p) throw std::invalid_argument("forward: inconsistent covariate length in batch");
    x.row(i) = in.x.transpose();
    taus(i, 0) = in.tau;
    lambdas[i] = in.lambda;
  }
  const BoundParams bound = bind_params(params, tape);
  const ad::Var gc = quantile_subnet(config, bound, tape.constant(std::move(taus)), tape);
  const ad::Var guc = data_subnet(config, bound, tape.constant(network_inputs(config, x, lambdas)), tape);
  return connection(config, bound, tape.add(gc, guc), tape);
}

}  // namespace pgqr
