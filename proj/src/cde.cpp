#include "pgqr/cde.hpp"

#include "pgqr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace pgqr {

namespace {

Matrix as_row(const Vector& x) { return x.transpose(); }

}  // namespace

GeneratedSamples generate(const FittedModel& model, const Vector& x, double lambda_star, int b, Rng& rng) {
  if (b < 1) throw std::invalid_argument("generate: b must be >= 1");
  if (x.size() != model.p()) throw std::invalid_argument("generate: covariate dimension mismatch");
  GeneratedSamples s;
  s.x = x;
  s.lambda_star = lambda_star;
  s.xi.resize(static_cast<std::size_t>(b));
  for (double& v : s.xi) v = rng.uniform01();
  const Matrix g = kernels::evaluate(model.config, model.params, model.stats.transform_x(as_row(x)), s.xi, lambda_star);
  s.values.resize(s.xi.size());
  for (std::size_t k = 0; k < s.xi.size(); ++k) s.values[k] = model.stats.y_to_original(g(0, static_cast<Eigen::Index>(k)));
  return s;
}

std::vector<double> quantile_curve(const FittedModel& model, const Vector& x, std::span<const double> taus,
                                   double lambda_star) {
  const Matrix c = quantile_curves(model, as_row(x), taus, lambda_star);
  return std::vector<double>(c.data(), c.data() + c.size());
}

Matrix quantile_curves(const FittedModel& model, const Matrix& x, std::span<const double> taus, double lambda_star) {
  if (x.cols() != model.p()) throw std::invalid_argument("quantile_curves: covariate dimension mismatch");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (taus[i] < taus[i - 1]) throw std::invalid_argument("quantile_curves: taus must be ascending");
  Matrix g = kernels::evaluate(model.config, model.params, model.stats.transform_x(x), taus, lambda_star);
  return (g.array() * model.stats.y_sd + model.stats.y_mean).matrix();
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: no data");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in [0,1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Moments moments(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("moments: need at least 2 samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return Moments{mean, std::sqrt(ss / (n - 1.0))};
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("kde: need at least 2 samples");
  const Moments m = moments(samples);
  // Spread at rounding level is a point mass too; a bandwidth there would be noise.
  if (!(m.sd > 1e-12 * std::max(1.0, std::abs(m.mean)))) throw PointMassError(m.mean);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = empirical_quantile(sorted, 0.75) - empirical_quantile(sorted, 0.25);
  double spread = std::min(m.sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = m.sd;
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityGrid kde(std::span<const double> samples, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("kde: grid_size must be >= 2");
  DensityGrid g;
  g.bandwidth = silverman_bandwidth(samples);
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *mn - 3.0 * g.bandwidth;
  const double hi = *mx + 3.0 * g.bandwidth;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * g.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  g.y.resize(static_cast<std::size_t>(grid_size));
  g.density.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    const double y = lo + (hi - lo) * static_cast<double>(i) / (grid_size - 1);
    double s = 0.0;
    for (double v : samples) {
      const double z = (y - v) / g.bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    g.y[static_cast<std::size_t>(i)] = y;
    g.density[static_cast<std::size_t>(i)] = s * norm;
  }
  return g;
}

std::vector<std::size_t> local_maxima(const DensityGrid& grid, double min_relative_height) {
  std::vector<std::size_t> out;
  const auto& d = grid.density;
  if (d.size() < 3) return out;
  const double top = *std::max_element(d.begin(), d.end());
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    if (d[i] > d[i - 1] && d[i] >= d[i + 1] && d[i] >= min_relative_height * top) out.push_back(i);
  }
  return out;
}

Interval prediction_interval(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("prediction_interval: level must lie in (0,1)");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - level) / 2.0;
  return Interval{empirical_quantile(sorted, tail), empirical_quantile(sorted, 1.0 - tail), level};
}

CdeReport build_report(const FittedModel& model, const Vector& x, double lambda_star, const CdeOptions& options,
                       Rng& rng) {
  const GeneratedSamples s = generate(model, x, lambda_star, options.b, rng);
  CdeReport r;
  r.x = x;
  r.lambda_star = lambda_star;
  try {
    r.density = kde(s, options.grid_size);
  } catch (const PointMassError&) {
    r.density.reset();
  }
  r.taus = options.taus;
  r.quantiles = quantile_curve(model, x, options.taus, lambda_star);
  r.interval = prediction_interval(s.values, options.level);
  r.summary = options.b >= 2 ? moments(s.values) : Moments{s.values.front(), 0.0};
  return r;
}

void write_cde_csv(const CdeReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_cde_csv: cannot write " + path.string());
  out << "section,key,value\n";
  for (Eigen::Index j = 0; j < r.x.size(); ++j) out << "x,x" << j + 1 << ',' << format_double(r.x[j]) << '\n';
  out << "lambda_star,lambda," << format_double(r.lambda_star) << '\n';
  out << "moments,mean," << format_double(r.summary.mean) << '\n';
  out << "moments,sd," << format_double(r.summary.sd) << '\n';
  out << "interval,level," << format_double(r.interval.level) << '\n';
  out << "interval,lo," << format_double(r.interval.lo) << '\n';
  out << "interval,hi," << format_double(r.interval.hi) << '\n';
  for (std::size_t i = 0; i < r.taus.size(); ++i)
    out << "quantile," << format_double(r.taus[i]) << ',' << format_double(r.quantiles[i]) << '\n';
  if (r.density) {
    out << "density,bandwidth," << format_double(r.density->bandwidth) << '\n';
    for (std::size_t i = 0; i < r.density->y.size(); ++i)
      out << "density," << format_double(r.density->y[i]) << ',' << format_double(r.density->density[i]) << '\n';
  } else {
    out << "point_mass,location," << format_double(r.summary.mean) << '\n';
  }
}

}  // namespace pgqr
