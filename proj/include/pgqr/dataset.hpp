#pragma once

#include "pgqr/autodiff.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pgqr {

/// Per-column centering and scaling computed on a training split.
struct Standardizer {
  Vector x_mean;
  Vector x_sd;
  double y_mean = 0.0;
  double y_sd = 1.0;

  Matrix transform_x(const Matrix& x) const;
  Vector transform_y(const Vector& y) const;
  double y_to_standard(double y) const { return (y - y_mean) / y_sd; }
  double y_to_original(double z) const { return y_mean + y_sd * z; }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> columns;  // covariate names, in file order
  std::string target = "y";
  std::optional<Standardizer> stats;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  Dataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Column means and sample sds (n-1) of x and y; zero-variance columns keep sd 1.
Standardizer fit_standardizer(const Dataset& train);
/// Copy with x and y standardized and `stats` set.
Dataset standardize(const Dataset& d, const Standardizer& s);

/// Headed CSV; every non-target column becomes a covariate in file order.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);
/// Writes covariates then the target column; doubles in shortest round-trip form.
void save_csv(const Dataset& d, const std::filesystem::path& path);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

struct Split {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
};

/// Seeded permutation, then contiguous blocks of floor(f0*n), floor(f1*n) and
/// the remainder. Rejects fractions that do not sum to 1 and empty parts.
Split split(const Dataset& d, std::array<double, 3> fractions, std::uint64_t seed);

}  // namespace pgqr
