#include "pgqr/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pgqr {

double check_loss(double u, double tau) { return u >= 0.0 ? u * tau : u * (tau - 1.0); }

double variability_penalty(double g1, double g2, double lambda, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("variability_penalty: alpha must be > 0");
  return -lambda * std::log(std::abs(g1 - g2) + 1.0 / alpha);
}

void PenaltyConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("PenaltyConfig: alpha must be > 0");
}

ad::Var pgqr_objective(ad::Var g_tau, ad::Var g_tau_prime, const Vector& y, std::span<const NoiseDraw> draws,
                       double alpha, ad::Tape& tape) {
  if (draws.empty()) throw std::invalid_argument("pgqr loss: empty batch");
  if (!(alpha > 0.0)) throw std::invalid_argument("pgqr loss: alpha must be > 0");
  const auto b = static_cast<Eigen::Index>(draws.size());
  if (y.size() != b || tape.value(g_tau).rows() != b || tape.value(g_tau_prime).rows() != b)
    throw std::invalid_argument("pgqr loss: one noise draw per example required");

  Matrix tau_shift(b, 1), neg_lambda(b, 1), yc(b, 1);
  for (Eigen::Index i = 0; i < b; ++i) {
    const NoiseDraw& d = draws[static_cast<std::size_t>(i)];
    if (!(d.tau > 0.0 && d.tau < 1.0 && d.tau_prime > 0.0 && d.tau_prime < 1.0))
      throw std::invalid_argument("pgqr loss: quantile levels must lie in (0,1)");
    tau_shift(i, 0) = d.tau - 0.5;
    neg_lambda(i, 0) = -d.lambda;
    yc(i, 0) = y[i];
  }

  const ad::Var u = tape.sub(tape.constant(std::move(yc)), g_tau);
  const ad::Var check = tape.add(tape.scale(tape.abs(u), 0.5), tape.mul(u, tape.constant(std::move(tau_shift))));
  const ad::Var spread = tape.add_scalar(tape.abs(tape.sub(g_tau, g_tau_prime)), 1.0 / alpha);
  const ad::Var penalty = tape.mul(tape.log(spread), tape.constant(std::move(neg_lambda)));
  return tape.mean(tape.add(check, penalty));
}

BatchLoss pgqr_batch_loss(const PMNNConfig& config, const PMNNParams& params, const Matrix& x, const Vector& y,
                          std::span<const NoiseDraw> draws, double alpha, ad::Tape& tape) {
  if (draws.empty() || x.rows() == 0) throw std::invalid_argument("pgqr loss: empty batch");
  const auto b = static_cast<Eigen::Index>(draws.size());
  if (x.rows() != b) throw std::invalid_argument("pgqr loss: one noise draw per example required");

  Matrix taus(b, 1), taus_prime(b, 1);
  std::vector<double> lambdas(draws.size());
  for (Eigen::Index i = 0; i < b; ++i) {
    taus(i, 0) = draws[static_cast<std::size_t>(i)].tau;
    taus_prime(i, 0) = draws[static_cast<std::size_t>(i)].tau_prime;
    lambdas[static_cast<std::size_t>(i)] = draws[static_cast<std::size_t>(i)].lambda;
  }

  BatchLoss out{ad::Var{}, bind_params(params, tape)};
  const ad::Var features = data_subnet(config, out.bound, tape.constant(network_inputs(config, x, lambdas)), tape);
  const ad::Var g1 = connection(config, out.bound,
                                tape.add(quantile_subnet(config, out.bound, tape.constant(std::move(taus)), tape), features),
                                tape);
  const ad::Var g2 = connection(
      config, out.bound, tape.add(quantile_subnet(config, out.bound, tape.constant(std::move(taus_prime)), tape), features),
      tape);
  out.loss = pgqr_objective(g1, g2, y, draws, alpha, tape);
  return out;
}

}  // namespace pgqr
