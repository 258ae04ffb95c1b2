#include "pgqr/pmnn.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace pgqr;

namespace {

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

std::vector<ModelInput> tau_grid(const Vector& x, double lambda) {
  std::vector<ModelInput> batch;
  for (int k = 1; k <= 9; ++k) batch.push_back({x, k / 10.0, lambda});
  return batch;
}

// Raw weights spread widely so that saturated and sign-varied regimes are visited.
PMNNParams scrambled(const PMNNConfig& c, int p, Rng& rng) {
  PMNNParams params = init_params(c, p, rng.engine()());
  for (Matrix* m : params.tensors())
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = 2.0 * rng.normal();
  return params;
}

}  // namespace

TEST_CASE("positivity transform") {
  CHECK(positivity_transform(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(positivity_transform(30.0) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(positivity_transform(-30.0) > 0.0);
  CHECK(positivity_transform(-30.0) == doctest::Approx(9.3576e-14).epsilon(1e-4));
  CHECK(positivity_transform(-1.0) < positivity_transform(-0.999));
}

TEST_CASE("init is deterministic, seed-sensitive and starts small positive") {
  const PMNNConfig c;
  const PMNNParams a = init_params(c, 4, 9);
  CHECK(a == init_params(c, 4, 9));
  CHECK(a.checksum() == init_params(c, 4, 9).checksum());
  CHECK_FALSE(a == init_params(c, 4, 10));
  double sum = 0.0;
  std::size_t count = 0;
  for (const Matrix& w : a.gc_raw_weights)
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double t = positivity_transform(w.data()[i]);
      CHECK(t > 0.0);
      sum += t;
      ++count;
    }
  CHECK(sum / static_cast<double>(count) == doctest::Approx(0.05).epsilon(0.2));
  for (const Matrix& b : a.gc_biases) CHECK(b.isZero(0.0));
  for (const Matrix& b : a.guc_biases) CHECK(b.isZero(0.0));
  CHECK(a.output_bias() == 0.0);
}

TEST_CASE("layer shapes chain from inputs to one output") {
  PMNNConfig c;
  c.width = 7;
  c.k1 = 2;
  c.k2 = 3;
  const PMNNParams a = init_params(c, 5, 1);
  REQUIRE(a.gc_raw_weights.size() == 2);
  REQUIRE(a.guc_weights.size() == 3);
  CHECK(a.gc_raw_weights[0].rows() == 1);
  CHECK(a.guc_weights[0].rows() == 6);  // p + 1 with lambda as input
  CHECK(a.f_raw_weights.rows() == 7);
  CHECK(a.f_raw_weights.cols() == 1);
  CHECK_NOTHROW(check_shapes(c, a, 5));
  CHECK_THROWS(check_shapes(c, a, 4));
  c.lambda_as_input = false;
  CHECK(init_params(c, 5, 1).guc_weights[0].rows() == 5);
  PMNNConfig bad;
  bad.k1 = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("one-neuron network matches a hand computation") {
  PMNNConfig c;
  c.width = 1;
  c.k1 = c.k2 = 1;
  c.gc_activation = c.guc_activation = c.connection_activation = Activation::Tanh;
  c.lambda_as_input = false;
  c.activate_subnet_outputs = true;
  PMNNParams p = init_params(c, 1, 0);
  p.gc_raw_weights[0] = one(0.3);
  p.gc_biases[0] = one(-0.2);
  p.guc_weights[0] = one(-1.1);
  p.guc_biases[0] = one(0.4);
  p.f_raw_weights = one(0.7);
  p.f_bias = one(0.25);
  const double tau = 0.35, x = 0.8;

  const double sp = [](double r) { return std::log1p(std::exp(r)); }(0.3);
  const double c1 = std::tanh(sp * tau - 0.2);
  const double u1 = std::tanh(-1.1 * x + 0.4);
  const double v = std::log1p(std::exp(0.7));
  const double expected = v * std::tanh(c1 + u1) + 0.25;

  ad::Tape t;
  const ModelInput in{Vector::Constant(1, x), tau, 0.0};
  const double got = t.value(forward(c, p, std::span(&in, 1), t))(0, 0);
  CHECK(std::abs(got - expected) < 1e-12);
}

TEST_CASE("two-layer network with affine sub-network heads matches a hand computation") {
  PMNNConfig c;
  c.width = 1;
  c.k1 = c.k2 = 2;
  c.lambda_as_input = true;
  c.lambda_hi = 2.0;
  PMNNParams p = init_params(c, 1, 0);
  p.gc_raw_weights = {one(0.1), one(-0.4)};
  p.gc_biases = {one(0.3), one(-0.1)};
  p.guc_weights = {Matrix(2, 1), one(0.9)};
  p.guc_weights[0] << 1.2, -0.5;
  p.guc_biases = {one(-0.2), one(0.05)};
  p.f_raw_weights = one(-0.3);
  p.f_bias = one(-0.6);
  const double tau = 0.8, x = 0.5, lambda = 1.5;
  auto sp = [](double r) { return std::log1p(std::exp(r)); };
  const double c2 = sp(-0.4) * std::tanh(sp(0.1) * tau + 0.3) - 0.1;
  const double u2 = 0.9 * std::max(1.2 * x - 0.5 * (lambda / 2.0) - 0.2, 0.0) + 0.05;
  const double expected = sp(-0.3) * std::max(c2 + u2, 0.0) - 0.6;

  ad::Tape t;
  const ModelInput in{Vector::Constant(1, x), tau, lambda};
  CHECK(std::abs(t.value(forward(c, p, std::span(&in, 1), t))(0, 0) - expected) < 1e-12);
}

TEST_CASE("a vanishing connection layer outputs the bias") {
  PMNNConfig c;
  c.width = 16;
  PMNNParams p = init_params(c, 3, 2);
  p.f_raw_weights.setConstant(-30.0);
  p.f_bias = one(1.75);
  Rng rng(3);
  std::vector<ModelInput> batch;
  for (int i = 0; i < 20; ++i) batch.push_back({Vector::NullaryExpr(3, [&] { return rng.normal(); }), rng.uniform01(), rng.uniform01()});
  ad::Tape t;
  const Matrix g = t.value(forward(c, p, batch, t));
  for (Eigen::Index i = 0; i < g.rows(); ++i) CHECK(std::abs(g(i, 0) - 1.75) < 1e-8);
}

TEST_CASE("forward rejects levels outside (0,1) and empty batches") {
  const PMNNConfig c;
  const PMNNParams p = init_params(c, 2, 1);
  ad::Tape t;
  for (double tau : {0.0, 1.0, -0.1, 1.5}) {
    const ModelInput in{Vector::Zero(2), tau, 0.0};
    CHECK_THROWS_AS(forward(c, p, std::span(&in, 1), t), std::invalid_argument);
  }
  CHECK_THROWS_AS(forward(c, p, std::span<const ModelInput>(), t), std::invalid_argument);
}

TEST_CASE("outputs are nondecreasing in tau for random parameters") {
  Rng rng(17);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    PMNNConfig c;
    c.width = 1 + static_cast<int>(rng.index(12));
    c.k1 = 1 + static_cast<int>(rng.index(3));
    c.k2 = 1 + static_cast<int>(rng.index(3));
    c.gc_activation = rng.coin() ? Activation::Tanh : Activation::Relu;
    c.connection_activation = rng.coin() ? Activation::Tanh : Activation::Relu;
    c.activate_subnet_outputs = rng.coin();
    const int p = 1 + static_cast<int>(rng.index(4));
    const PMNNParams params = scrambled(c, p, rng);
    const Vector x = Vector::NullaryExpr(p, [&] { return 2.0 * rng.normal(); });
    ad::Tape t;
    const Matrix g = t.value(forward(c, params, tau_grid(x, rng.uniform01()), t));
    for (Eigen::Index k = 1; k < g.rows(); ++k)
      if (g(k, 0) < g(k - 1, 0) - 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("tau only moves the constrained pathway") {
  PMNNConfig c;
  c.width = 8;
  Rng rng(4);
  const PMNNParams p = scrambled(c, 2, rng);
  const Vector x = Vector::NullaryExpr(2, [&] { return rng.normal(); });
  ad::Tape t;
  const BoundParams b = bind_params(p, t, false);
  const std::vector<double> lam{0.3, 0.3};
  const ad::Var u = data_subnet(c, b, t.constant(network_inputs(c, Matrix(x.transpose()), std::span(lam.data(), 1))), t);
  Matrix taus(2, 1);
  taus << 0.2, 0.7;
  const ad::Var gc = quantile_subnet(c, b, t.constant(taus), t);
  const Matrix uu = t.value(u);
  const Matrix cc = t.value(gc);
  auto f = [&](Eigen::Index row) {
    double s = p.output_bias();
    for (Eigen::Index j = 0; j < c.width; ++j)
      s += positivity_transform(p.f_raw_weights(j, 0)) * apply(c.connection_activation, cc(row, j) + uu(0, j));
    return s;
  };
  ad::Tape t2;
  const std::vector<ModelInput> batch{{x, 0.2, 0.3}, {x, 0.7, 0.3}};
  const Matrix g = t2.value(forward(c, p, batch, t2));
  CHECK(g(1, 0) - g(0, 0) == doctest::Approx(f(1) - f(0)).epsilon(1e-12));
}

TEST_CASE("forward is deterministic") {
  const PMNNConfig c;
  const PMNNParams p = init_params(c, 3, 8);
  const std::vector<ModelInput> batch{{Vector::Ones(3), 0.4, 0.1}, {Vector::Zero(3), 0.9, 0.5}};
  ad::Tape a, b;
  CHECK(a.value(forward(c, p, batch, a)) == b.value(forward(c, p, batch, b)));
}

TEST_CASE("lambda enters min-max scaled over the grid range") {
  PMNNConfig c;
  c.lambda_lo = 0.0;
  c.lambda_hi = 2.0;
  CHECK(c.scale_lambda(1.0) == 0.5);
  CHECK(c.scale_lambda(0.0) == 0.0);
  c.lambda_hi = 0.0;  // single-point grid
  CHECK(std::isfinite(c.scale_lambda(0.0)));
}
