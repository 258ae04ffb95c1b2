#pragma once

// Tape-free evaluation of a trained PMNN. The expensive part is the
// connection layer over a (points x quantile levels) grid:
//
//   out(n, m) = b + sum_j w_j * s(C(m, j) + U(n, j))
//
// where C holds g_c features of the quantile levels and U the g_uc features
// of the points. Each kernel comes in a plain serial reference and an OpenMP
// version over points. Every output element is reduced by one thread in a
// fixed order, so results do not depend on the thread count.

#include "pgqr/pmnn.hpp"

#include <span>
#include <vector>

namespace pgqr::kernels {

/// g_c(tau) for each level: levels.size() x width.
Matrix quantile_features(const PMNNConfig& config, const PMNNParams& params, std::span<const double> taus);

/// g_uc(x, lambda) for each row of standardized covariates: rows x width.
Matrix data_features(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, double lambda);

/// Positivity-transformed connection weights (width).
Vector connection_weights(const PMNNParams& params);

struct Connection {
  Vector weights;
  double bias = 0.0;
  Activation activation = Activation::Relu;

  static Connection from(const PMNNConfig& config, const PMNNParams& params);
};

/// Full (points x levels) output grid.
Matrix connect_serial(const Connection& f, const Matrix& quantile_feats, const Matrix& data_feats);
Matrix connect_parallel(const Connection& f, const Matrix& quantile_feats, const Matrix& data_feats);

/// For each point n, the number of levels m with out(n, m) < thresholds[n].
/// Fuses the grid evaluation with the count so the grid is never stored.
std::vector<int> count_below_serial(const Connection& f, const Matrix& quantile_feats, const Matrix& data_feats,
                                    std::span<const double> thresholds);
std::vector<int> count_below_parallel(const Connection& f, const Matrix& quantile_feats, const Matrix& data_feats,
                                      std::span<const double> thresholds);

/// Standardized-scale G for every (row of x, tau) pair at one lambda.
Matrix evaluate(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, std::span<const double> taus,
                double lambda);

}  // namespace pgqr::kernels
