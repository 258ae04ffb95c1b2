#pragma once

#include "pgqr/autodiff.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pgqr {

/// Activations must be monotone nondecreasing; monotonicity in tau relies on it.
enum class Activation { Tanh, Relu, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);
double apply(Activation a, double x);

/// Architecture of the partial monotonic network
///
///   G(x, tau, lambda) = f( g_c(tau) + g_uc(x, lambda) )
///
/// g_c is a k1-layer network on tau with positive weights, g_uc a k2-layer
/// unconstrained network on the covariates (plus the scaled penalty weight),
/// and f(z) = sum_j w_j * s(z_j) + b with positive w_j and a monotone s.
struct PMNNConfig {
  int k1 = 3;
  int k2 = 3;
  int width = 256;
  Activation gc_activation = Activation::Tanh;
  Activation guc_activation = Activation::Relu;
  Activation connection_activation = Activation::Relu;
  bool lambda_as_input = true;
  /// Apply the sub-network activation on the last layer of g_c and g_uc too.
  /// Off: both sub-networks end in an affine layer and s is the only
  /// nonlinearity after the sum.
  bool activate_subnet_outputs = false;
  /// Range of the lambda grid; lambda enters g_uc min-max scaled to [0,1].
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;

  void validate() const;
  double scale_lambda(double lambda) const;
  friend bool operator==(const PMNNConfig&, const PMNNConfig&) = default;
};

/// Raw parameters. Constrained weights are stored before the positivity
/// transform; weight matrices are laid out (fan_in x fan_out) and biases as 1 x fan_out.
struct PMNNParams {
  std::vector<Matrix> gc_raw_weights;
  std::vector<Matrix> gc_biases;
  std::vector<Matrix> guc_weights;
  std::vector<Matrix> guc_biases;
  Matrix f_raw_weights;  // width x 1
  Matrix f_bias;         // 1 x 1

  int input_dim() const { return guc_weights.empty() ? 0 : static_cast<int>(guc_weights.front().rows()); }
  double output_bias() const { return f_bias(0, 0); }

  /// Every parameter tensor in a fixed order (the optimizer and the checkpoint rely on it).
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;
  /// FNV-1a over the bytes of every parameter, in tensors() order.
  std::uint64_t checksum() const;

  friend bool operator==(const PMNNParams&, const PMNNParams&) = default;
};

/// One network query. lambda is ignored when the model was built without lambda input.
struct ModelInput {
  Vector x;
  double tau = 0.5;
  double lambda = 0.0;
};

/// softplus(raw); strictly positive and increasing in raw.
double positivity_transform(double raw);

/// Fan-in scaled symmetric uniform weights for g_uc, constrained raw weights
/// whose transformed values average about 0.05, zero biases.
PMNNParams init_params(const PMNNConfig& config, int p, std::uint64_t seed);

/// Checks tensor shapes against the config and covariate dimension p.
void check_shapes(const PMNNConfig& config, const PMNNParams& params, int p);

/// Parameter leaves plus their positivity-transformed views, recorded on a tape.
struct BoundParams {
  std::vector<ad::Var> raw;  // parallel to PMNNParams::tensors()
  std::vector<ad::Var> gc_weights;
  std::vector<ad::Var> gc_biases;
  std::vector<ad::Var> guc_weights;
  std::vector<ad::Var> guc_biases;
  ad::Var f_weights;
  ad::Var f_bias;
};

BoundParams bind_params(const PMNNParams& params, ad::Tape& tape, bool requires_grad = true);

/// g_c applied to a column of quantile levels (B x 1) -> B x width.
ad::Var quantile_subnet(const PMNNConfig& config, const BoundParams& bound, ad::Var taus, ad::Tape& tape);
/// g_uc applied to the network input rows (B x input_dim) -> B x width.
ad::Var data_subnet(const PMNNConfig& config, const BoundParams& bound, ad::Var inputs, ad::Tape& tape);
/// f applied to the summed features (B x width) -> B x 1.
ad::Var connection(const PMNNConfig& config, const BoundParams& bound, ad::Var summed, ad::Tape& tape);

/// Rows of the g_uc input: covariates, followed by the scaled lambda column when enabled.
Matrix network_inputs(const PMNNConfig& config, const Matrix& x, std::span<const double> lambdas);

/// G for every batch row, recorded on the tape (batch x 1). Rejects tau outside (0,1).
ad::Var forward(const PMNNConfig& config, const PMNNParams& params, std::span<const ModelInput> batch,
                ad::Tape& tape);

}  // namespace pgqr
