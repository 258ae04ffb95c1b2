#pragma once

#include "pgqr/dataset.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pgqr {

/// Data-generating processes. In every case X ~ N(0, I_p).
///
///  Linear  p=20  Y = X'b + e,  b equispaced on [-2,2], e ~ N(0,1)
///  Sim1    p=1   Y = B X + e,  B uniform on {-1,0,1}, e ~ N(0, 0.25|X|)
///  Sim2    p=5   Y = X'b + e,  b equispaced on [-2,2], e = C if X1 >= 0.5 else log C,
///                              C ~ noncentral chi-square(df 1, noncentrality 1)
///  Sim3    p=5   Y = X'B + e,  B1 uniform on {-2,2}, B2..B5 equispaced on [-2,2], e ~ N(0,1)
///  Sim4    p=5   Y = 0.5 log(10 - X1^2) + 0.75 exp(X2 X3 / 5) - 0.25 |X4 / 2| + e, e ~ N(0,1)
///                (X1 is redrawn until X1^2 < 10 so the log is defined)
///  Sim5    p=1   Y = X + e,    e ~ N(0, 0.01)
enum class SimKind { Linear, Sim1, Sim2, Sim3, Sim4, Sim5 };

std::string to_string(SimKind k);
/// Accepts "linear" and "1".."5" (also "sim1".."sim5").
SimKind sim_from_string(std::string_view s);
int covariate_dim(SimKind k);

struct SimSpec {
  SimKind kind = SimKind::Linear;
  int n = 2000;
  std::uint64_t seed = 1;
};

Dataset generate_data(const SimSpec& spec);

/// Conditional functionals of Y given X under a simulation's law.
class Oracle {
 public:
  struct Summary {
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> quantiles;
  };

  virtual ~Oracle() = default;
  virtual double mean(const Vector& x) const = 0;
  virtual double sd(const Vector& x) const = 0;
  virtual double quantile(const Vector& x, double tau) const = 0;
  /// All three at once; Monte Carlo oracles reuse one transformed draw set.
  virtual Summary summarize(const Vector& x, std::span<const double> taus) const;
  /// Residual draws behind the oracle, or 0 for closed forms.
  virtual std::size_t draw_budget() const { return 0; }
};

inline constexpr std::size_t kOracleDraws = 1'000'000;

/// Closed form for Linear, Sim3 and Sim5; Monte Carlo over `draws` residual
/// draws (seeded by `oracle_seed`) for Sim1, Sim2 and Sim4.
std::unique_ptr<Oracle> oracle_for(SimKind kind, std::uint64_t oracle_seed = 7, std::size_t draws = kOracleDraws);

/// Coefficients of the linear parts (Linear: 20 values, Sim2: 5, Sim3: the 4 fixed ones).
std::vector<double> equispaced(double lo, double hi, int count);

}  // namespace pgqr
