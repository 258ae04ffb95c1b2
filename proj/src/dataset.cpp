#include "pgqr/dataset.hpp"

#include "pgqr/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pgqr {

Matrix Standardizer::transform_x(const Matrix& x) const {
  if (x.cols() != x_mean.size()) throw std::invalid_argument("Standardizer: covariate dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = (x.col(j).array() - x_mean[j]) / x_sd[j];
  return out;
}

Vector Standardizer::transform_y(const Vector& y) const { return (y.array() - y_mean) / y_sd; }

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    out.y[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  }
  out.columns = columns;
  out.target = target;
  out.stats = stats;
  return out;
}

namespace {

double sample_sd(const Eigen::Ref<const Vector>& v, double mean) {
  if (v.size() < 2) return 1.0;
  const double ss = (v.array() - mean).square().sum();
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return sd > 0.0 ? sd : 1.0;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Standardizer fit_standardizer(const Dataset& train) {
  if (train.n() < 1) throw std::invalid_argument("fit_standardizer: empty dataset");
  Standardizer s;
  s.x_mean = train.x.colwise().mean().transpose();
  s.x_sd.resize(train.p());
  for (Eigen::Index j = 0; j < train.p(); ++j) s.x_sd[j] = sample_sd(train.x.col(j), s.x_mean[j]);
  s.y_mean = train.y.mean();
  s.y_sd = sample_sd(train.y, s.y_mean);
  return s;
}

Dataset standardize(const Dataset& d, const Standardizer& s) {
  Dataset out = d;
  out.x = s.transform_x(d.x);
  out.y = s.transform_y(d.y);
  out.stats = s;
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path.string());
  const std::vector<std::string> header = split_line(line);
  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end())
    throw std::invalid_argument("load_csv: target column '" + target_column + "' not found in " + path.string());
  const std::size_t target_idx = static_cast<std::size_t>(target_it - header.begin());

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("load_csv: row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw std::invalid_argument("load_csv: missing or non-numeric cell at row " + std::to_string(row_no) +
                                    ", column " + std::to_string(c + 1) + " ('" + header[c] + "')");
      values[c] = v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::invalid_argument("load_csv: no data rows in " + path.string());
  if (header.size() < 2) throw std::invalid_argument("load_csv: need at least one covariate column");

  Dataset d;
  d.target = target_column;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_idx) d.columns.push_back(header[c]);
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  d.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target_idx)
        d.y[static_cast<Eigen::Index>(r)] = rows[r][c];
      else
        d.x(static_cast<Eigen::Index>(r), j++) = rows[r][c];
    }
  }
  return d;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot write " + path.string());
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    out << (static_cast<std::size_t>(j) < d.columns.size() ? d.columns[j] : "x" + std::to_string(j + 1)) << ',';
  }
  out << d.target << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) out << format_double(d.x(i, j)) << ',';
    out << format_double(d.y[i]) << '\n';
  }
}

Split split(const Dataset& d, std::array<double, 3> fractions, std::uint64_t seed) {
  const double total = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(total - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0)
    throw std::invalid_argument("split: fractions must be nonnegative and sum to 1");
  const auto n = static_cast<std::size_t>(d.n());
  const auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * static_cast<double>(n) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw std::invalid_argument("split: n=" + std::to_string(n) + " leaves an empty train/validation/test part");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng.engine());

  Split s;
  s.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                           perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  s.train = d.subset(s.train_rows);
  s.validation = d.subset(s.validation_rows);
  s.test = d.subset(s.test_rows);
  return s;
}

}  // namespace pgqr
