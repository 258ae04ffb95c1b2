#pragma once

#include "pgqr/dataset.hpp"
#include "pgqr/model.hpp"
#include "pgqr/rng.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace pgqr {

/// Estimated PIT values of the validation responses at one grid value.
struct PitVector {
  double lambda = 0.0;
  std::vector<double> p_hat;
};

/// (1/M) * #{k : G(x, tau_k, lambda) < y} with tau_k ~ Uniform(0,1).
/// x and y are on the original scale.
double pit_estimate(const FittedModel& model, const Vector& x, double y, double lambda, int draws, Rng& rng);

/// sum_i (i/n - p_(i) - 2/n)^2 / n over the ascending order statistics p_(i), i = 1..n.
double cvm_distance(std::span<const double> p_hat);

/// Kolmogorov-Smirnov distance between the empirical law of `values` and Uniform(0,1).
double ks_uniform_distance(std::span<const double> values);

struct LambdaScore {
  double lambda = 0.0;
  double cvm = 0.0;
  double conditional_sd = 0.0;  // mean over validation points of the generated sd
  double coverage = 0.0;        // share of validation responses inside the 95% generated interval
};

struct LambdaSelection {
  double lambda_star = 0.0;
  std::vector<LambdaScore> table;
  std::vector<PitVector> pits;
};

/// Smallest-CvM lambda; ties go to the smaller lambda. The same M levels are
/// shared by every grid value and validation point.
LambdaSelection select_lambda(const FittedModel& model, const Dataset& validation, int draws, Rng& rng);

/// Index of the smallest-CvM entry; ties go to the smaller lambda.
std::size_t argmin_cvm(std::span<const PitVector> pits);

/// CSV with columns lambda,cvm,conditional_sd,coverage.
void write_lambda_table(const LambdaSelection& selection, const std::filesystem::path& path);

}  // namespace pgqr
