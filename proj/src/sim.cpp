#include "pgqr/sim.hpp"

#include "pgqr/cde.hpp"
#include "pgqr/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgqr {

std::string to_string(SimKind k) {
  switch (k) {
    case SimKind::Linear: return "linear";
    case SimKind::Sim1: return "1";
    case SimKind::Sim2: return "2";
    case SimKind::Sim3: return "3";
    case SimKind::Sim4: return "4";
    case SimKind::Sim5: return "5";
  }
  return "?";
}

SimKind sim_from_string(std::string_view s) {
  if (s.starts_with("sim")) s.remove_prefix(3);
  if (s == "linear") return SimKind::Linear;
  if (s == "1") return SimKind::Sim1;
  if (s == "2") return SimKind::Sim2;
  if (s == "3") return SimKind::Sim3;
  if (s == "4") return SimKind::Sim4;
  if (s == "5") return SimKind::Sim5;
  throw std::invalid_argument("unknown simulation '" + std::string(s) + "'");
}

int covariate_dim(SimKind k) {
  switch (k) {
    case SimKind::Linear: return 20;
    case SimKind::Sim1:
    case SimKind::Sim5: return 1;
    case SimKind::Sim2:
    case SimKind::Sim3:
    case SimKind::Sim4: return 5;
  }
  throw std::invalid_argument("unknown simulation kind");
}

std::vector<double> equispaced(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

namespace {

double dot(const Vector& x, const std::vector<double>& b, int offset = 0) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * x[static_cast<Eigen::Index>(j) + offset];
  return s;
}

double sim4_mean(const Vector& x) {
  return 0.5 * std::log(10.0 - x[0] * x[0]) + 0.75 * std::exp(x[1] * x[2] / 5.0) - 0.25 * std::abs(x[3] / 2.0);
}

double noncentral_chisq_1_1(Rng& rng) {
  const double z = rng.normal() + 1.0;
  return z * z;
}

const std::vector<double>& linear_beta() {
  static const std::vector<double> b = equispaced(-2.0, 2.0, 20);
  return b;
}
const std::vector<double>& sim2_beta() {
  static const std::vector<double> b = equispaced(-2.0, 2.0, 5);
  return b;
}
const std::vector<double>& sim3_tail_beta() {
  static const std::vector<double> b = equispaced(-2.0, 2.0, 4);
  return b;
}

double phi_inv(double tau) { return boost::math::quantile(boost::math::normal_distribution<double>(), tau); }
double phi(double z) { return boost::math::cdf(boost::math::normal_distribution<double>(), z); }

// ---- closed forms -------------------------------------------------------

class GaussianOracle : public Oracle {
 public:
  GaussianOracle(double (*mean_fn)(const Vector&), double sd) : mean_fn_(mean_fn), sd_(sd) {}
  double mean(const Vector& x) const override { return mean_fn_(x); }
  double sd(const Vector&) const override { return sd_; }
  double quantile(const Vector& x, double tau) const override { return mean(x) + sd_ * phi_inv(tau); }

 private:
  double (*mean_fn_)(const Vector&);
  double sd_;
};

// Equal-weight mixture of N(m + 2 X1, 1) and N(m - 2 X1, 1).
class Sim3Oracle : public Oracle {
 public:
  double mean(const Vector& x) const override { return center(x); }
  double sd(const Vector& x) const override { return std::sqrt(1.0 + 4.0 * x[0] * x[0]); }
  double quantile(const Vector& x, double tau) const override {
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("oracle quantile: tau must lie in (0,1)");
    const double m = center(x);
    const double shift = std::abs(2.0 * x[0]);
    auto cdf = [&](double y) { return 0.5 * phi(y - m - shift) + 0.5 * phi(y - m + shift); };
    double lo = m - shift + phi_inv(tau);  // mixture quantile lies between the component quantiles
    double hi = m + shift + phi_inv(tau);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  static double center(const Vector& x) { return dot(x, sim3_tail_beta(), 1); }
};

// ---- Monte Carlo --------------------------------------------------------

// Y(x) = transform(x, base draw k); functionals are taken over the transformed draws.
class MonteCarloOracle : public Oracle {
 public:
  explicit MonteCarloOracle(std::size_t draws) : draws_(draws) {}

  double mean(const Vector& x) const override { return summarize(x, {}).mean; }
  double sd(const Vector& x) const override { return summarize(x, {}).sd; }
  double quantile(const Vector& x, double tau) const override {
    const double t[] = {tau};
    return summarize(x, t).quantiles.front();
  }
  Summary summarize(const Vector& x, std::span<const double> taus) const override {
    std::vector<double> y(draws_);
    for (std::size_t k = 0; k < draws_; ++k) y[k] = sample(x, k);
    Summary s;
    const Moments m = moments(y);
    s.mean = m.mean;
    s.sd = m.sd;
    if (!taus.empty()) {
      std::sort(y.begin(), y.end());
      for (double t : taus) {
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("oracle quantile: tau must lie in (0,1)");
        s.quantiles.push_back(empirical_quantile(y, t));
      }
    }
    return s;
  }
  std::size_t draw_budget() const override { return draws_; }

 protected:
  virtual double sample(const Vector& x, std::size_t k) const = 0;
  std::size_t draws_;
};

class Sim1Oracle : public MonteCarloOracle {
 public:
  Sim1Oracle(std::uint64_t seed, std::size_t draws) : MonteCarloOracle(draws), z_(draws), slope_(draws) {
    Rng rng(seed);
    for (std::size_t k = 0; k < draws; ++k) {
      slope_[k] = static_cast<double>(rng.index(3)) - 1.0;
      z_[k] = rng.normal();
    }
  }

 protected:
  double sample(const Vector& x, std::size_t k) const override {
    return slope_[k] * x[0] + std::sqrt(0.25 * std::abs(x[0])) * z_[k];
  }

 private:
  std::vector<double> z_, slope_;
};

class Sim2Oracle : public MonteCarloOracle {
 public:
  Sim2Oracle(std::uint64_t seed, std::size_t draws) : MonteCarloOracle(draws), c_(draws) {
    Rng rng(seed);
    for (double& c : c_) c = noncentral_chisq_1_1(rng);
  }

 protected:
  double sample(const Vector& x, std::size_t k) const override {
    return dot(x, sim2_beta()) + (x[0] >= 0.5 ? c_[k] : std::log(c_[k]));
  }

 private:
  std::vector<double> c_;
};

class Sim4Oracle : public MonteCarloOracle {
 public:
  Sim4Oracle(std::uint64_t seed, std::size_t draws) : MonteCarloOracle(draws), z_(draws) {
    Rng rng(seed);
    for (double& z : z_) z = rng.normal();
  }

 protected:
  double sample(const Vector& x, std::size_t k) const override { return sim4_mean(x) + z_[k]; }

 private:
  std::vector<double> z_;
};

}  // namespace

Oracle::Summary Oracle::summarize(const Vector& x, std::span<const double> taus) const {
  Summary s{mean(x), sd(x), {}};
  for (double t : taus) s.quantiles.push_back(quantile(x, t));
  return s;
}

std::unique_ptr<Oracle> oracle_for(SimKind kind, std::uint64_t oracle_seed, std::size_t draws) {
  switch (kind) {
    case SimKind::Linear:
      return std::make_unique<GaussianOracle>([](const Vector& x) { return dot(x, linear_beta()); }, 1.0);
    case SimKind::Sim5: return std::make_unique<GaussianOracle>([](const Vector& x) { return x[0]; }, 0.1);
    case SimKind::Sim3: return std::make_unique<Sim3Oracle>();
    case SimKind::Sim1: return std::make_unique<Sim1Oracle>(oracle_seed, draws);
    case SimKind::Sim2: return std::make_unique<Sim2Oracle>(oracle_seed, draws);
    case SimKind::Sim4: return std::make_unique<Sim4Oracle>(oracle_seed, draws);
  }
  throw std::invalid_argument("oracle_for: unknown simulation kind");
}

Dataset generate_data(const SimSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("generate_data: n must be >= 1");
  const int p = covariate_dim(spec.kind);
  Rng rng(spec.seed);
  Dataset d;
  d.x.resize(spec.n, p);
  d.y.resize(spec.n);
  for (int j = 0; j < p; ++j) d.columns.push_back("x" + std::to_string(j + 1));
  d.target = "y";
  for (int i = 0; i < spec.n; ++i) {
    Vector x(p);
    for (int j = 0; j < p; ++j) x[j] = rng.normal();
    if (spec.kind == SimKind::Sim4)
      while (x[0] * x[0] >= 10.0) x[0] = rng.normal();
    double y = 0.0;
    switch (spec.kind) {
      case SimKind::Linear: y = dot(x, linear_beta()) + rng.normal(); break;
      case SimKind::Sim1: {
        const double slope = static_cast<double>(rng.index(3)) - 1.0;
        y = slope * x[0] + rng.normal(0.0, std::sqrt(0.25 * std::abs(x[0])));
        break;
      }
      case SimKind::Sim2: {
        const double c = noncentral_chisq_1_1(rng);
        y = dot(x, sim2_beta()) + (x[0] >= 0.5 ? c : std::log(c));
        break;
      }
      case SimKind::Sim3: {
        const double b1 = rng.coin() ? 2.0 : -2.0;
        y = b1 * x[0] + dot(x, sim3_tail_beta(), 1) + rng.normal();
        break;
      }
      case SimKind::Sim4: y = sim4_mean(x) + rng.normal(); break;
      case SimKind::Sim5: y = x[0] + rng.normal(0.0, 0.1); break;
    }
    d.x.row(i) = x.transpose();
    d.y[i] = y;
  }
  return d;
}

}  // namespace pgqr
