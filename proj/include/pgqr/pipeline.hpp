#pragma once

// The stages a run is made of, each writing its artifacts into one directory.
// Failures surface as StageError carrying the stage name, and leave a FAILED
// marker next to whatever the stage had already written.

#include "pgqr/cde.hpp"
#include "pgqr/config.hpp"
#include "pgqr/lambda_select.hpp"
#include "pgqr/metrics.hpp"
#include "pgqr/sim.hpp"
#include "pgqr/trainer.hpp"

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>

namespace pgqr {

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline constexpr const char* kFailureMarker = "FAILED";

/// Runs `body`; any exception becomes a StageError for `stage`, and a FAILED
/// file holding the message is written into `dir`.
void run_stage(const std::string& stage, const std::filesystem::path& dir, const std::function<void()>& body);

/// Covariate rows for prediction: every column except `target` (when present).
Matrix load_points(const std::filesystem::path& path, const std::string& target);

struct Evaluation {
  MetricsReport metrics;
  Matrix curves;                    // test points x taus, original scale
  std::vector<Moments> generated;   // per test point
  std::vector<Interval> intervals;  // per test point
};

/// Generated mean, sd, interval and quantile curves per test point at
/// lambda_star. One set of b levels is shared by all test points. Without an
/// oracle the PMSE fields are NaN.
Evaluation evaluate_model(const FittedModel& model, const Dataset& test, double lambda_star, const Oracle* oracle,
                          const CdeOptions& options, Rng& rng);

struct TrainOutcome {
  FittedModel model;
  Split parts;
  TrainReport report;
};

/// data.csv plus data.json recording the spec.
Dataset run_simulate(const SimSpec& spec, const std::filesystem::path& out);
/// Split with the "split" substream, fit on the training part. Writes
/// checkpoint.json, train_log.csv and the three split CSVs.
TrainOutcome run_train(const Dataset& data, const RunConfig& config, const std::filesystem::path& out);
/// lambda_table.csv and selection.json.
LambdaSelection run_select_lambda(const FittedModel& model, const Dataset& validation, int draws, std::uint64_t seed,
                                  const std::filesystem::path& out);
/// One cde_point_<i>.csv per row of `points`.
void run_predict(const FittedModel& model, double lambda_star, const Matrix& points, const CdeOptions& options,
                 std::uint64_t seed, const std::filesystem::path& out);
/// metrics.csv (one row) and quantile_pmse.csv.
Evaluation run_evaluate(const FittedModel& model, const Dataset& test, double lambda_star, const Oracle* oracle,
                        const std::string& sim_name, const CdeOptions& options, std::uint64_t seed,
                        const std::filesystem::path& out);
/// Replicate r uses sim seed + r and master seed + r, in rep_<r>/. The
/// top-level metrics.csv and quantile_pmse.csv average the replicates and
/// hold no timings, so equal seeds give equal bytes.
MetricsReport run_report(const RunConfig& config);

/// Reads a lambda_star from selection.json.
double read_selection(const std::filesystem::path& path);

}  // namespace pgqr
