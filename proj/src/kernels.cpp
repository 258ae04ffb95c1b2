#include "pgqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgqr::kernels {

namespace {

void activate_inplace(Activation a, Matrix& m) {
  if (a == Activation::Tanh)
    m = m.array().tanh();
  else if (a == Activation::Relu)
    m = m.cwiseMax(0.0);
}

void check_widths(const Connection& f, const Matrix& qf, const Matrix& df) {
  if (qf.cols() != f.weights.size() || df.cols() != f.weights.size())
    throw std::invalid_argument("kernels: feature width does not match connection weights");
}

// Inner reduction shared by the OpenMP kernels; simd gives a fixed vectorized order.
inline double connect_one_simd(const double* c, const double* u, const double* w, Eigen::Index h, Activation a) {
  double s = 0.0;
  if (a == Activation::Relu) {
#pragma omp simd reduction(+ : s)
    for (Eigen::Index j = 0; j < h; ++j) s += w[j] * std::max(c[j] + u[j], 0.0);
  } else if (a == Activation::Identity) {
#pragma omp simd reduction(+ : s)
    for (Eigen::Index j = 0; j < h; ++j) s += w[j] * (c[j] + u[j]);
  } else {
    for (Eigen::Index j = 0; j < h; ++j) s += w[j] * std::tanh(c[j] + u[j]);
  }
  return s;
}

inline double connect_one_scalar(const Connection& f, const double* c, const double* u, Eigen::Index h) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < h; ++j) s += f.weights[j] * apply(f.activation, c[j] + u[j]);
  return s;
}

}  // namespace

Matrix quantile_features(const PMNNConfig& config, const PMNNParams& params, std::span<const double> taus) {
  Matrix h(static_cast<Eigen::Index>(taus.size()), 1);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
    h(static_cast<Eigen::Index>(i), 0) = taus[i];
  }
  for (std::size_t l = 0; l < params.gc_raw_weights.size(); ++l) {
    const Matrix w = params.gc_raw_weights[l].unaryExpr([](double r) { return positivity_transform(r); });
    Matrix next = h * w;
    next.rowwise() += params.gc_biases[l].row(0);
    if (config.activate_subnet_outputs || l + 1 < params.gc_raw_weights.size())
      activate_inplace(config.gc_activation, next);
    h = std::move(next);
  }
  return h;
}

Matrix data_features(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, double lambda) {
  const std::vector<double> lambdas(static_cast<std::size_t>(x.rows()), lambda);
  Matrix h = network_inputs(config, x, lambdas);
  if (h.cols() != params.input_dim()) throw std::invalid_argument("data_features: covariate dimension mismatch");
  for (std::size_t l = 0; l < params.guc_weights.size(); ++l) {
    Matrix next = h * params.guc_weights[l];
    next.rowwise() += params.guc_biases[l].row(0);
    if (config.activate_subnet_outputs || l + 1 < params.guc_weights.size())
      activate_inplace(config.guc_activation, next);
    h = std::move(next);
  }
  return h;
}

Vector connection_weights(const PMNNParams& params) {
  return params.f_raw_weights.col(0).unaryExpr([](double r) { return positivity_transform(r); });
}

Connection Connection::from(const PMNNConfig& config, const PMNNParams& params) {
  return Connection{connection_weights(params), params.output_bias(), config.connection_activation};
}

Matrix connect_serial(const Connection& f, const Matrix& qf, const Matrix& df) {
  check_widths(f, qf, df);
  const Eigen::Index h = f.weights.size();
  Matrix out(df.rows(), qf.rows());
  for (Eigen::Index n = 0; n < df.rows(); ++n)
    for (Eigen::Index m = 0; m < qf.rows(); ++m)
      out(n, m) = f.bias + connect_one_scalar(f, qf.row(m).data(), df.row(n).data(), h);
  return out;
}

Matrix connect_parallel(const Connection& f, const Matrix& qf, const Matrix& df) {
  check_widths(f, qf, df);
  const Eigen::Index h = f.weights.size();
  Matrix out(df.rows(), qf.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < df.rows(); ++n)
    for (Eigen::Index m = 0; m < qf.rows(); ++m)
      out(n, m) = f.bias + connect_one_simd(qf.row(m).data(), df.row(n).data(), f.weights.data(), h, f.activation);
  return out;
}

std::vector<int> count_below_serial(const Connection& f, const Matrix& qf, const Matrix& df,
                                    std::span<const double> thresholds) {
  check_widths(f, qf, df);
  if (static_cast<Eigen::Index>(thresholds.size()) != df.rows())
    throw std::invalid_argument("count_below: one threshold per point required");
  const Eigen::Index h = f.weights.size();
  std::vector<int> counts(thresholds.size(), 0);
  for (Eigen::Index n = 0; n < df.rows(); ++n)
    for (Eigen::Index m = 0; m < qf.rows(); ++m)
      if (f.bias + connect_one_scalar(f, qf.row(m).data(), df.row(n).data(), h) < thresholds[n]) ++counts[n];
  return counts;
}

std::vector<int> count_below_parallel(const Connection& f, const Matrix& qf, const Matrix& df,
                                      std::span<const double> thresholds) {
  check_widths(f, qf, df);
  if (static_cast<Eigen::Index>(thresholds.size()) != df.rows())
    throw std::invalid_argument("count_below: one threshold per point required");
  const Eigen::Index h = f.weights.size();
  std::vector<int> counts(thresholds.size(), 0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index n = 0; n < df.rows(); ++n) {
    int c = 0;
    for (Eigen::Index m = 0; m < qf.rows(); ++m)
      if (f.bias + connect_one_simd(qf.row(m).data(), df.row(n).data(), f.weights.data(), h, f.activation) < thresholds[n])
        ++c;
    counts[n] = c;
  }
  return counts;
}

Matrix evaluate(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, std::span<const double> taus,
                double lambda) {
  return connect_parallel(Connection::from(config, params), quantile_features(config, params, taus),
                          data_features(config, params, x, lambda));
}

}  // namespace pgqr::kernels
