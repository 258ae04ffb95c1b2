#pragma once

#include "pgqr/dataset.hpp"
#include "pgqr/loss.hpp"
#include "pgqr/model.hpp"
#include "pgqr/rng.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pgqr {

enum class OptimizerKind { Sgd, Adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Cosine decay of the step size to learning_rate * final_lr_fraction over
  /// the whole run. 1 keeps it constant.
  double final_lr_fraction = 1.0;
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 256;
  OptimizerConfig optimizer;
  double alpha = 1.0;
  LambdaGrid lambda_grid = LambdaGrid::equispaced(0.0, 1.0, 100);
  std::uint64_t seed = 1;
  PMNNConfig pmnn;
  /// Off: the response is only centered, so the penalty acts on the data's own scale.
  bool standardize_response = true;

  void validate() const;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_seconds;
  std::size_t steps = 0;
  std::uint64_t checksum = 0;
};

/// Thrown when a step produces a non-finite loss or value.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t step, double loss, const std::string& what)
      : std::runtime_error(what), step_(step), loss_(loss) {}
  std::size_t step() const { return step_; }
  double loss() const { return loss_; }

 private:
  std::size_t step_;
  double loss_;
};

/// n independent (tau, tau', lambda): tau, tau' ~ Uniform(0,1), lambda uniform over the grid.
std::vector<NoiseDraw> sample_noise(std::size_t n, const LambdaGrid& grid, Rng& rng);

/// Minimal Adam / SGD over the tensors of a PMNNParams.
class Optimizer {
 public:
  /// `total_steps` is the decay horizon; 0 means no decay.
  Optimizer(const OptimizerConfig& config, const PMNNParams& shape, long total_steps = 0);
  void step(PMNNParams& params, const std::vector<const Matrix*>& grads);
  /// Step size used by the next call to step().
  double current_rate() const;

 private:
  OptimizerConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
  long total_steps_ = 0;
};

struct TrainResult {
  PMNNConfig config;  // with the lambda range of the grid filled in
  PMNNParams params;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Minibatch optimization of the PGQR loss on an already standardized training
/// set. Each epoch reshuffles, each step draws fresh noise per example. The
/// last batch of an epoch may be short. Fully determined by config.seed.
TrainResult train(const Dataset& train_std, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Standardizes `train_raw`, trains, and bundles the result.
struct FitResult {
  FittedModel model;
  TrainReport report;
};
FitResult fit(const Dataset& train_raw, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Mean check loss on a standardized dataset at a fixed lambda, with one
/// fresh Uniform(0,1) level per example.
double mean_check_loss(const PMNNConfig& config, const PMNNParams& params, const Dataset& data_std, double lambda,
                       Rng& rng);

}  // namespace pgqr
