#include "pgqr/lambda_select.hpp"

#include "pgqr/cde.hpp"
#include "pgqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pgqr {

double pit_estimate(const FittedModel& model, const Vector& x, double y, double lambda, int draws, Rng& rng) {
  if (draws < 1) throw std::invalid_argument("pit_estimate: need at least one draw");
  if (x.size() != model.p()) throw std::invalid_argument("pit_estimate: covariate dimension mismatch");
  std::vector<double> taus(static_cast<std::size_t>(draws));
  for (double& t : taus) t = rng.uniform01();
  const Matrix xs = model.stats.transform_x(x.transpose());
  const double threshold = model.stats.y_to_standard(y);
  const std::vector<int> below = kernels::count_below_parallel(
      kernels::Connection::from(model.config, model.params), kernels::quantile_features(model.config, model.params, taus),
      kernels::data_features(model.config, model.params, xs, lambda), std::span<const double>(&threshold, 1));
  return static_cast<double>(below[0]) / static_cast<double>(draws);
}

double cvm_distance(std::span<const double> p_hat) {
  if (p_hat.empty()) throw std::invalid_argument("cvm_distance: empty input");
  std::vector<double> sorted(p_hat.begin(), p_hat.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    // (rank - 2) / n folded into one division so a shifted grid gives exactly zero.
    const double term = (static_cast<double>(i) - 1.0) / n - sorted[i];
    d += term * term;
  }
  return d / n;
}

double ks_uniform_distance(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ks_uniform_distance: empty input");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
  }
  return d;
}

std::size_t argmin_cvm(std::span<const PitVector> pits) {
  if (pits.empty()) throw std::invalid_argument("argmin_cvm: empty grid");
  std::size_t best = 0;
  double best_d = cvm_distance(pits[0].p_hat);
  for (std::size_t l = 1; l < pits.size(); ++l) {
    const double d = cvm_distance(pits[l].p_hat);
    if (d < best_d || (d == best_d && pits[l].lambda < pits[best].lambda)) {
      best = l;
      best_d = d;
    }
  }
  return best;
}

LambdaSelection select_lambda(const FittedModel& model, const Dataset& validation, int draws, Rng& rng) {
  if (validation.n() == 0) throw std::invalid_argument("select_lambda: empty validation set");
  if (draws < 1) throw std::invalid_argument("select_lambda: need at least one draw");
  std::vector<double> taus(static_cast<std::size_t>(draws));
  for (double& t : taus) t = rng.uniform01();

  const Matrix xs = model.stats.transform_x(validation.x);
  const Matrix quantile_feats = kernels::quantile_features(model.config, model.params, taus);
  const kernels::Connection f = kernels::Connection::from(model.config, model.params);
  const auto n = static_cast<std::size_t>(validation.n());

  LambdaSelection sel;
  for (double lambda : model.grid.values) {
    const Matrix g = kernels::connect_parallel(f, quantile_feats, kernels::data_features(model.config, model.params, xs, lambda));
    PitVector pit{lambda, std::vector<double>(n)};
    double sd_sum = 0.0;
    std::size_t covered = 0;
    std::vector<double> row(static_cast<std::size_t>(draws));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double y = validation.y[ii];
      int below = 0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        row[k] = model.stats.y_to_original(g(ii, static_cast<Eigen::Index>(k)));
        if (row[k] < y) ++below;
      }
      pit.p_hat[i] = static_cast<double>(below) / static_cast<double>(draws);
      if (draws >= 2) {
        sd_sum += moments(row).sd;
        const Interval iv = prediction_interval(row, 0.95);
        if (y >= iv.lo && y <= iv.hi) ++covered;
      }
    }
    sel.table.push_back(LambdaScore{lambda, cvm_distance(pit.p_hat), sd_sum / static_cast<double>(n),
                                    static_cast<double>(covered) / static_cast<double>(n)});
    sel.pits.push_back(std::move(pit));
  }
  sel.lambda_star = sel.pits[argmin_cvm(sel.pits)].lambda;
  return sel;
}

void write_lambda_table(const LambdaSelection& selection, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_lambda_table: cannot write " + path.string());
  out << "lambda,cvm,conditional_sd,coverage\n";
  for (const LambdaScore& s : selection.table)
    out << format_double(s.lambda) << ',' << format_double(s.cvm) << ',' << format_double(s.conditional_sd) << ','
        << format_double(s.coverage) << '\n';
}

}  // namespace pgqr
