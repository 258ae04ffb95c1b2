#include "pgqr/kernels.hpp"

#include "support.hpp"

#include <doctest.h>

#include <omp.h>

using namespace pgqr;

namespace {

struct Grid {
  PMNNConfig config;
  PMNNParams params;
  Matrix x;
  std::vector<double> taus;
};

Grid make_grid(Activation connection, int width, std::uint64_t seed) {
  Rng rng(seed);
  Grid g;
  g.config.width = width;
  g.config.connection_activation = connection;
  g.params = init_params(g.config, 3, seed);
  for (Matrix* m : g.params.tensors())
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] += 0.3 * rng.normal();
  g.x = testing::random_matrix(rng, 13, 3);
  for (int k = 0; k < 37; ++k) g.taus.push_back(rng.uniform01());
  return g;
}

}  // namespace

TEST_CASE("tape-free evaluation agrees with the tape forward") {
  for (Activation a : {Activation::Relu, Activation::Tanh, Activation::Identity}) {
    const Grid g = make_grid(a, 24, 3);
    const Matrix fast = kernels::evaluate(g.config, g.params, g.x, g.taus, 0.4);
    std::vector<ModelInput> batch;
    for (Eigen::Index i = 0; i < g.x.rows(); ++i)
      for (double t : g.taus) batch.push_back({g.x.row(i).transpose(), t, 0.4});
    ad::Tape tape;
    const Matrix slow = tape.value(forward(g.config, g.params, batch, tape));
    for (Eigen::Index i = 0; i < fast.rows(); ++i)
      for (Eigen::Index k = 0; k < fast.cols(); ++k)
        CHECK(testing::close(fast(i, k), slow(i * fast.cols() + k, 0), 1e-12, 1e-12));
  }
}

TEST_CASE("serial and parallel connection kernels agree") {
  for (Activation a : {Activation::Relu, Activation::Tanh, Activation::Identity}) {
    const Grid g = make_grid(a, 64, 5);
    const auto f = kernels::Connection::from(g.config, g.params);
    const Matrix qf = kernels::quantile_features(g.config, g.params, g.taus);
    const Matrix df = kernels::data_features(g.config, g.params, g.x, 0.1);
    const Matrix s = kernels::connect_serial(f, qf, df);
    const Matrix p = kernels::connect_parallel(f, qf, df);
    REQUIRE(s.rows() == p.rows());
    REQUIRE(s.cols() == p.cols());
    CHECK((s - p).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<double> thr;
    for (Eigen::Index i = 0; i < df.rows(); ++i) thr.push_back(s.row(i).mean());
    CHECK(kernels::count_below_serial(f, qf, df, thr) == kernels::count_below_parallel(f, qf, df, thr));
  }
}

TEST_CASE("parallel kernels do not depend on the thread count") {
  const Grid g = make_grid(Activation::Relu, 64, 8);
  const auto f = kernels::Connection::from(g.config, g.params);
  const Matrix qf = kernels::quantile_features(g.config, g.params, g.taus);
  const Matrix df = kernels::data_features(g.config, g.params, g.x, 0.9);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Matrix one = kernels::connect_parallel(f, qf, df);
  omp_set_num_threads(4);
  const Matrix four = kernels::connect_parallel(f, qf, df);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("count below matches a direct count") {
  const Grid g = make_grid(Activation::Relu, 16, 9);
  const auto f = kernels::Connection::from(g.config, g.params);
  const Matrix qf = kernels::quantile_features(g.config, g.params, g.taus);
  const Matrix df = kernels::data_features(g.config, g.params, g.x, 0.0);
  const Matrix out = kernels::connect_serial(f, qf, df);
  std::vector<double> thr(static_cast<std::size_t>(df.rows()), 0.05);
  const std::vector<int> c = kernels::count_below_parallel(f, qf, df, thr);
  for (Eigen::Index i = 0; i < out.rows(); ++i) CHECK(c[i] == (out.row(i).array() < 0.05).count());
  CHECK_THROWS_AS(kernels::count_below_serial(f, qf, df, std::vector<double>(2, 0.0)), std::invalid_argument);
}

TEST_CASE("quantile features reject levels outside (0,1)") {
  const Grid g = make_grid(Activation::Relu, 4, 1);
  const std::vector<double> bad{0.5, 1.0};
  CHECK_THROWS_AS(kernels::quantile_features(g.config, g.params, bad), std::invalid_argument);
}
