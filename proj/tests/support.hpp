#pragma once

#include "pgqr/autodiff.hpp"
#include "pgqr/rng.hpp"

#include <cmath>
#include <filesystem>
#include <string>

namespace testing {

inline pgqr::Matrix random_matrix(pgqr::Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  pgqr::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

/// |a - b| <= rel * max(|a|, |b|) or |a - b| <= abs_floor.
inline bool close(double a, double b, double rel, double abs_floor) {
  const double d = std::abs(a - b);
  return d <= abs_floor || d <= rel * std::max(std::abs(a), std::abs(b));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pgqr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
