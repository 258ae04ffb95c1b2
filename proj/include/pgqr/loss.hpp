#pragma once

#include "pgqr/pmnn.hpp"

#include <span>

namespace pgqr {

/// rho_tau(u) = u * (tau - 1{u < 0}).
double check_loss(double u, double tau);

/// -lambda * log(|g1 - g2| + 1/alpha). Largest (lambda * log(alpha)) when g1 == g2.
double variability_penalty(double g1, double g2, double lambda, double alpha);

struct PenaltyConfig {
  double alpha = 1.0;
  void validate() const;
};

/// One Monte Carlo draw for one example: two quantile levels and a penalty weight.
struct NoiseDraw {
  double tau = 0.5;
  double tau_prime = 0.5;
  double lambda = 0.0;
};

/// Mean over rows of check_loss(y - g_tau, tau) + variability_penalty(g_tau, g_tau_prime, lambda, alpha),
/// recorded on the tape. The check loss is written without an indicator as
/// 0.5 |u| + (tau - 0.5) u. g_tau and g_tau_prime are B x 1.
ad::Var pgqr_objective(ad::Var g_tau, ad::Var g_tau_prime, const Vector& y, std::span<const NoiseDraw> draws,
                       double alpha, ad::Tape& tape);

struct BatchLoss {
  ad::Var loss;
  BoundParams bound;
};

/// PGQR loss of a minibatch: x holds standardized covariates (B x p), y the
/// standardized responses. The g_uc features are shared between tau and tau'.
BatchLoss pgqr_batch_loss(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, const Vector& y,
                          std::span<const NoiseDraw> draws, double alpha, ad::Tape& tape);

}  // namespace pgqr
