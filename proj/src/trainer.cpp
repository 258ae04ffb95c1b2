#include "pgqr/trainer.hpp"

#include "pgqr/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace pgqr {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(optimizer.learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  if (!(optimizer.final_lr_fraction > 0.0 && optimizer.final_lr_fraction <= 1.0))
    throw std::invalid_argument("TrainConfig: final_lr_fraction must be in (0, 1]");
  if (!(alpha > 0.0)) throw std::invalid_argument("TrainConfig: alpha must be > 0");
  lambda_grid.validate();
  pmnn.validate();
}

std::vector<NoiseDraw> sample_noise(std::size_t n, const LambdaGrid& grid, Rng& rng) {
  std::vector<NoiseDraw> draws(n);
  for (NoiseDraw& d : draws) {
    d.tau = rng.uniform01();
    d.tau_prime = rng.uniform01();
    d.lambda = grid.size() == 1 ? grid.values[0] : grid.values[rng.index(grid.size())];
  }
  return draws;
}

Optimizer::Optimizer(const OptimizerConfig& config, const PMNNParams& shape, long total_steps)
    : config_(config), total_steps_(total_steps) {
  for (const Matrix* m : shape.tensors()) {
    m_.push_back(Matrix::Zero(m->rows(), m->cols()));
    v_.push_back(Matrix::Zero(m->rows(), m->cols()));
  }
}

double Optimizer::current_rate() const {
  const double f = config_.final_lr_fraction;
  if (total_steps_ <= 0 || f == 1.0) return config_.learning_rate;
  const double progress = std::min(1.0, static_cast<double>(t_) / static_cast<double>(total_steps_));
  return config_.learning_rate * (f + (1.0 - f) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void Optimizer::step(PMNNParams& params, const std::vector<const Matrix*>& grads) {
  std::vector<Matrix*> ts = params.tensors();
  if (grads.size() != ts.size()) throw std::invalid_argument("Optimizer: gradient count mismatch");
  const double lr = current_rate();
  ++t_;
  if (config_.kind == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < ts.size(); ++i) *ts[i] -= lr * *grads[i];
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Matrix& g = *grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
    ts[i]->array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

namespace {

void assert_positive_constrained(const PMNNParams& p) {
  auto check = [](const Matrix& raw) {
    for (Eigen::Index i = 0; i < raw.size(); ++i)
      if (!(positivity_transform(raw.data()[i]) > 0.0))
        throw std::logic_error("trainer: constrained weight underflowed to zero");
  };
  for (const Matrix& m : p.gc_raw_weights) check(m);
  check(p.f_raw_weights);
}

}  // namespace

TrainResult train(const Dataset& train_std, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  const auto n = static_cast<std::size_t>(train_std.n());
  if (n == 0) throw std::invalid_argument("train: empty training set");
  if (static_cast<std::size_t>(config.batch_size) > n)
    throw std::invalid_argument("train: batch_size " + std::to_string(config.batch_size) + " exceeds training size " +
                                std::to_string(n));

  TrainResult result;
  result.config = config.pmnn;
  result.config.lambda_lo = config.lambda_grid.lo();
  result.config.lambda_hi = config.lambda_grid.hi();
  const int p = static_cast<int>(train_std.p());
  result.params = init_params(result.config, p, substream_seed(config.seed, "init"));

  Rng shuffle_rng = substream(config.seed, "shuffle");
  Rng noise_rng = substream(config.seed, "noise");
  const long per_epoch = static_cast<long>((n + static_cast<std::size_t>(config.batch_size) - 1) /
                                           static_cast<std::size_t>(config.batch_size));
  Optimizer opt(config.optimizer, result.params, per_epoch * config.epochs);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  ad::Tape tape;
  Matrix xb;
  Vector yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      xb.resize(b, train_std.p());
      yb.resize(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const auto row = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]);
        xb.row(i) = train_std.x.row(row);
        yb[i] = train_std.y[row];
      }
      const std::vector<NoiseDraw> draws = sample_noise(static_cast<std::size_t>(b), config.lambda_grid, noise_rng);

      tape.clear();
      double loss = 0.0;
      try {
        const BatchLoss bl = pgqr_batch_loss(result.config, result.params, xb, yb, draws, config.alpha, tape);
        loss = tape.value(bl.loss)(0, 0);
        if (!std::isfinite(loss)) throw std::domain_error("non-finite loss");
        tape.backward(bl.loss);
        std::vector<const Matrix*> grads;
        for (ad::Var v : bl.bound.raw) grads.push_back(&tape.grad(v));
        opt.step(result.params, grads);
      } catch (const std::domain_error& e) {
        std::ostringstream os;
        os << "train: step " << result.report.steps << " (epoch " << epoch + 1 << "): " << e.what()
           << ", loss=" << loss;
        throw TrainingError(result.report.steps, loss, os.str());
      }
      for (const Matrix* m : result.params.tensors())
        if (!m->allFinite())
          throw TrainingError(result.report.steps, loss,
                              "train: step " + std::to_string(result.report.steps) + ": parameters became non-finite");
      loss_sum += loss;
      ++batches;
      ++result.report.steps;
    }
    assert_positive_constrained(result.params);
    const double mean_loss = loss_sum / static_cast<double>(batches);
    result.report.epoch_loss.push_back(mean_loss);
    result.report.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (on_epoch) on_epoch(epoch + 1, mean_loss);
  }
  result.report.checksum = result.params.checksum();
  return result;
}

FitResult fit(const Dataset& train_raw, const TrainConfig& config, const EpochCallback& on_epoch) {
  Standardizer stats = fit_standardizer(train_raw);
  if (!config.standardize_response) stats.y_sd = 1.0;
  TrainResult tr = train(standardize(train_raw, stats), config, on_epoch);
  FitResult out;
  out.model.config = tr.config;
  out.model.params = std::move(tr.params);
  out.model.grid = config.lambda_grid;
  out.model.stats = stats;
  out.model.seed = config.seed;
  out.model.alpha = config.alpha;
  out.report = std::move(tr.report);
  return out;
}

double mean_check_loss(const PMNNConfig& config, const PMNNParams& params, const Dataset& data_std, double lambda,
                       Rng& rng) {
  if (data_std.n() == 0) throw std::invalid_argument("mean_check_loss: empty dataset");
  double total = 0.0;
  for (Eigen::Index i = 0; i < data_std.n(); ++i) {
    const double tau = rng.uniform01();
    const Matrix row = data_std.x.row(i);
    const double g = kernels::evaluate(config, params, row, std::span<const double>(&tau, 1), lambda)(0, 0);
    total += check_loss(data_std.y[i] - g, tau);
  }
  return total / static_cast<double>(data_std.n());
}

}  // namespace pgqr
