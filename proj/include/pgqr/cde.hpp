#pragma once

#include "pgqr/model.hpp"
#include "pgqr/rng.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pgqr {

/// b draws from the estimated conditional law at one covariate vector (original scale).
struct GeneratedSamples {
  Vector x;
  double lambda_star = 0.0;
  std::vector<double> xi;
  std::vector<double> values;
};

/// values[k] = G(x, xi_k, lambda_star) with xi_k ~ Uniform(0,1), on the original response scale.
GeneratedSamples generate(const FittedModel& model, const Vector& x, double lambda_star, int b, Rng& rng);

/// G(x, tau, lambda_star) for each tau, original scale. Nondecreasing for ascending taus.
std::vector<double> quantile_curve(const FittedModel& model, const Vector& x, std::span<const double> taus,
                                   double lambda_star);

/// Quantile curves for every row of x (original-scale covariates); rows x taus.
Matrix quantile_curves(const FittedModel& model, const Matrix& x, std::span<const double> taus, double lambda_star);

/// Type-7 empirical quantile of ascending-sorted data: linear interpolation
/// at position (n-1) q.
double empirical_quantile(std::span<const double> sorted, double q);

struct DensityGrid {
  std::vector<double> y;
  std::vector<double> density;
  double bandwidth = 0.0;
};

/// Samples identical up to rounding: there is no density to smooth.
class PointMassError : public std::domain_error {
 public:
  explicit PointMassError(double location)
      : std::domain_error("kde: zero-variance samples form a point mass"), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

double silverman_bandwidth(std::span<const double> samples);

/// Gaussian KDE with Silverman's bandwidth on grid_size equispaced points over
/// [min - 3 bw, max + 3 bw]. Throws PointMassError for zero-variance input.
DensityGrid kde(std::span<const double> samples, int grid_size = 512);
inline DensityGrid kde(const GeneratedSamples& s, int grid_size = 512) { return kde(s.values, grid_size); }

/// Indices of strict interior local maxima whose height is at least
/// min_relative_height times the global maximum.
std::vector<std::size_t> local_maxima(const DensityGrid& grid, double min_relative_height = 0.0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
};

/// Empirical quantiles at (1-level)/2 and 1-(1-level)/2 (type 7).
Interval prediction_interval(std::span<const double> samples, double level);

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

/// Sample mean and sd with the n-1 denominator. Needs at least 2 samples.
Moments moments(std::span<const double> samples);

struct CdeReport {
  Vector x;
  double lambda_star = 0.0;
  std::optional<DensityGrid> density;  // empty for a point mass
  std::vector<double> taus;
  std::vector<double> quantiles;
  Interval interval;
  Moments summary;
};

struct CdeOptions {
  int b = 1000;
  int grid_size = 512;
  double level = 0.95;
  std::vector<double> taus{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

CdeReport build_report(const FittedModel& model, const Vector& x, double lambda_star, const CdeOptions& options,
                       Rng& rng);

/// One long-format CSV per point: section,key,value rows for the density grid,
/// quantile curve, interval and moments.
void write_cde_csv(const CdeReport& report, const std::filesystem::path& path);

}  // namespace pgqr
