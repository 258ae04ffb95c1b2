#include "pgqr/metrics.hpp"

#include <fstream>
#include <stdexcept>

namespace pgqr {

double pmse(std::span<const double> estimates, std::span<const double> truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("pmse: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("pmse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) s += (estimates[i] - truths[i]) * (estimates[i] - truths[i]);
  return s / static_cast<double>(estimates.size());
}

CoverageWidth coverage_width(std::span<const Interval> intervals, std::span<const double> y) {
  if (intervals.size() != y.size()) throw std::invalid_argument("coverage_width: length mismatch");
  if (intervals.empty()) throw std::invalid_argument("coverage_width: empty input");
  std::size_t covered = 0;
  double width = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Interval& iv = intervals[i];
    if (iv.lo > iv.hi) throw std::invalid_argument("coverage_width: interval with lo > hi at index " + std::to_string(i));
    if (y[i] >= iv.lo && y[i] <= iv.hi) ++covered;
    width += iv.hi - iv.lo;
  }
  const double n = static_cast<double>(y.size());
  return CoverageWidth{static_cast<double>(covered) / n, width / n};
}

std::map<double, double> quantile_pmse(const Matrix& curves, const Matrix& truth, std::span<const double> taus) {
  if (curves.rows() != truth.rows() || curves.cols() != truth.cols() ||
      curves.cols() != static_cast<Eigen::Index>(taus.size()))
    throw std::invalid_argument("quantile_pmse: shape mismatch");
  std::map<double, double> out;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (!(taus[k] > 0.0 && taus[k] < 1.0)) throw std::invalid_argument("quantile_pmse: tau must lie in (0,1)");
    const Vector est = curves.col(static_cast<Eigen::Index>(k));
    const Vector tru = truth.col(static_cast<Eigen::Index>(k));
    out[taus[k]] = pmse(std::span<const double>(est.data(), static_cast<std::size_t>(est.size())),
                        std::span<const double>(tru.data(), static_cast<std::size_t>(tru.size())));
  }
  return out;
}

std::map<double, double> quantile_pmse(const Matrix& curves, const Oracle& oracle, const Matrix& x,
                                       std::span<const double> taus) {
  Matrix truth(x.rows(), static_cast<Eigen::Index>(taus.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector xi = x.row(i).transpose();
    const auto q = oracle.summarize(xi, taus).quantiles;
    for (std::size_t k = 0; k < q.size(); ++k) truth(i, static_cast<Eigen::Index>(k)) = q[k];
  }
  return quantile_pmse(curves, truth, taus);
}

int crossing_audit(std::span<const double> curve) {
  int violations = 0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    if (curve[k] < curve[k - 1] - kCrossingTolerance) ++violations;
  return violations;
}

int crossing_audit(const Matrix& curves) {
  int violations = 0;
  for (Eigen::Index i = 0; i < curves.rows(); ++i) {
    const Vector row = curves.row(i).transpose();
    violations += crossing_audit(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return violations;
}

MetricsReport aggregate(std::span<const MetricsReport> replicates) {
  if (replicates.empty()) throw std::invalid_argument("aggregate: no replicates");
  MetricsReport out;
  const double n = static_cast<double>(replicates.size());
  for (const MetricsReport& r : replicates) {
    out.pmse_mean += r.pmse_mean / n;
    out.pmse_sd += r.pmse_sd / n;
    out.coverage += r.coverage / n;
    out.avg_width += r.avg_width / n;
    out.crossing_violations += r.crossing_violations;
    for (const auto& [tau, v] : r.quantile_pmse) out.quantile_pmse[tau] += v / n;
  }
  return out;
}

void write_metrics_table(std::span<const TableRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_table: cannot write " + path.string());
  out << "method,sim,pmse_mean,pmse_sd,coverage,width\n";
  for (const TableRow& r : rows)
    out << r.method << ',' << r.sim << ',' << format_double(r.metrics.pmse_mean) << ','
        << format_double(r.metrics.pmse_sd) << ',' << format_double(r.metrics.coverage) << ','
        << format_double(r.metrics.avg_width) << '\n';
}

void write_quantile_table(std::span<const TableRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_quantile_table: cannot write " + path.string());
  out << "method,sim,tau,pmse\n";
  for (const TableRow& r : rows)
    for (const auto& [tau, v] : r.metrics.quantile_pmse)
      out << r.method << ',' << r.sim << ',' << format_double(tau) << ',' << format_double(v) << '\n';
}

}  // namespace pgqr
