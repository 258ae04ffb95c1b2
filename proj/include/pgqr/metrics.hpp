#pragma once

#include "pgqr/cde.hpp"
#include "pgqr/sim.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pgqr {

/// Mean squared difference between predicted and true functionals.
double pmse(std::span<const double> estimates, std::span<const double> truths);

struct CoverageWidth {
  double coverage = 0.0;
  double avg_width = 0.0;
};

/// Share of y inside the closed interval [lo, hi], and the mean width.
CoverageWidth coverage_width(std::span<const Interval> intervals, std::span<const double> y);

/// Per-level PMSE of quantile curves (rows = test points, cols = taus) against the oracle.
std::map<double, double> quantile_pmse(const Matrix& curves, const Oracle& oracle, const Matrix& x,
                                       std::span<const double> taus);
/// Same, with the oracle quantiles already evaluated (rows x taus).
std::map<double, double> quantile_pmse(const Matrix& curves, const Matrix& truth, std::span<const double> taus);

inline constexpr double kCrossingTolerance = 1e-9;

/// Adjacent pairs per row with curve(k+1) < curve(k) - 1e-9, summed over rows.
int crossing_audit(const Matrix& curves);
int crossing_audit(std::span<const double> curve);

struct MetricsReport {
  double pmse_mean = 0.0;  // PMSE of E(Y|X)
  double pmse_sd = 0.0;    // PMSE of sd(Y|X)
  std::map<double, double> quantile_pmse;
  double coverage = 0.0;
  double avg_width = 0.0;
  int crossing_violations = 0;
};

/// Plain mean over replicates; crossing violations are summed.
MetricsReport aggregate(std::span<const MetricsReport> replicates);

struct TableRow {
  std::string method;
  std::string sim;
  MetricsReport metrics;
};

/// Columns: method,sim,pmse_mean,pmse_sd,coverage,width.
void write_metrics_table(std::span<const TableRow> rows, const std::filesystem::path& path);
/// Columns: method,sim,tau,pmse.
void write_quantile_table(std::span<const TableRow> rows, const std::filesystem::path& path);

}  // namespace pgqr
