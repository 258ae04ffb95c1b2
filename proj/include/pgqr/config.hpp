#pragma once

#include "pgqr/cde.hpp"
#include "pgqr/sim.hpp"
#include "pgqr/trainer.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace pgqr {

enum class Mode { Simulate, Train, SelectLambda, Evaluate, Predict, Report };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

inline constexpr int kConfigVersion = 1;

/// Everything one run needs. Saved configs carry every default explicitly.
struct RunConfig {
  Mode mode = Mode::Report;
  std::optional<SimSpec> sim;       // simulated data source
  std::filesystem::path data_path;  // or a CSV source
  std::string target = "y";
  TrainConfig train;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  std::filesystem::path output_dir = "out";
  int replicates = 5;
  int pit_draws = 1000;  // M
  CdeOptions cde;        // b, KDE grid, interval level, quantile levels
  /// Master seed. Training, splitting, PIT levels and xi draws use named
  /// substreams of it; train.seed is overwritten with it.
  std::uint64_t seed = 1;

  /// Mode-specific requirements are checked only when `check_mode` is set.
  void validate(bool check_mode = true) const;
};

std::string config_to_json(const RunConfig& config);
/// With `check_mode` unset the file's mode is kept but its requirements are not
/// enforced; callers that fix the mode themselves validate afterwards.
RunConfig config_from_json(std::string_view text, bool check_mode = true);

void save_config(const RunConfig& config, const std::filesystem::path& path);
/// Missing keys fall back to the defaults above; unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& path, bool check_mode = true);

}  // namespace pgqr
