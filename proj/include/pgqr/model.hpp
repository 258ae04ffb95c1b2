#pragma once

#include "pgqr/dataset.hpp"
#include "pgqr/pmnn.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pgqr {

/// Support of the discrete uniform prior on the penalty weight.
struct LambdaGrid {
  std::vector<double> values;

  /// Nonempty, finite, nonnegative, strictly ascending.
  void validate() const;
  double lo() const { return values.front(); }
  double hi() const { return values.back(); }
  std::size_t size() const { return values.size(); }

  static LambdaGrid equispaced(double lo, double hi, int count);
  static LambdaGrid single(double value) { return LambdaGrid{{value}}; }

  friend bool operator==(const LambdaGrid&, const LambdaGrid&) = default;
};

/// Everything needed to query a trained generator on the original data scale.
struct FittedModel {
  PMNNConfig config;
  PMNNParams params;
  LambdaGrid grid;
  Standardizer stats;
  std::uint64_t seed = 0;
  double alpha = 1.0;

  int p() const { return static_cast<int>(stats.x_mean.size()); }

  friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

inline constexpr int kCheckpointVersion = 1;

/// JSON checkpoint with a format-version tag. Doubles are written in shortest
/// round-trip form, so load(save(m)) == m bit for bit.
void save_checkpoint(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace pgqr
