#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pgqr {

/// 64-bit engine with the two draws the library needs. Deterministic given
/// the seed on a given standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform01();
  double normal(double mean = 0.0, double sd = 1.0);
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);
  bool coin() { return (engine_() >> 63) != 0; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed of a named substream of `master` ("init", "shuffle", "noise", "xi",
/// "pit", "data", ...). Distinct names give unrelated streams.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name);

inline Rng substream(std::uint64_t master, std::string_view name) {
  return Rng(substream_seed(master, name));
}

}  // namespace pgqr
