#pragma once

// Fully connected gain predictor: ReLU hidden layers and a logistic output
// rescaled to [gain_floor, 1].

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "hanr/adam.hpp"
#include "hanr/features.hpp"
#include "hanr/wiener.hpp"

namespace hanr {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetworkTopology {
  int input_dim = 0;
  int hidden_layers = 3;
  int hidden_width = 2048;
  int output_dim = kNumBands;
  double max_atten_db = kDefaultMaxAttenDb;

  double gain_floor() const { return hanr::gain_floor(max_atten_db); }
  void validate() const;
  bool operator==(const NetworkTopology&) const = default;
};

struct DenseLayer {
  RowMatrixXf weight;  // out x in
  Eigen::VectorXf bias;
};

struct NetworkParams {
  NetworkTopology topology;
  std::vector<DenseLayer> layers;  // hidden_layers + 1 entries

  std::size_t num_parameters() const;
};

// He-style uniform initialisation (limit sqrt(6 / fan_in)), zero biases.
NetworkParams init_params(const NetworkTopology& topo, std::uint64_t seed);
NetworkParams zero_params(const NetworkTopology& topo);

// Single-frame inference. Throws ConfigError on dimension mismatch.
GainVector forward(const NetworkParams& p, std::span<const float> x);
GainVector forward(const NetworkParams& p, std::span<const double> x);

// Batched inference; columns of x are samples. Returns output_dim x batch.
Eigen::MatrixXf forward_batch(const NetworkParams& p, const Eigen::MatrixXf& x);

// sqrt(mean squared error) over every element; throws on empty or mismatched
// batches.
double rmse_loss(const Eigen::MatrixXf& pred, const Eigen::MatrixXf& target);

struct Gradients {
  std::vector<DenseLayer> layers;
  double mse = 0.0;  // loss at the evaluated point
};

// Gradient of the mean squared error (mean over batch and outputs).
Gradients backward(const NetworkParams& p, const Eigen::MatrixXf& x,
                   const Eigen::MatrixXf& target);

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  std::int64_t step = 0;

  static AdamState zeros_like(const NetworkParams& p);
};

void adam_step(NetworkParams& p, const Gradients& g, AdamState& state,
               const AdamHyper& hyper);

struct TrainConfig {
  double learning_rate = 1e-5;
  int epochs = 10;
  int batch_size = 128;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t rng_seed = 1;

  void validate() const;
  AdamHyper hyper() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
};

struct EpochLoss {
  int epoch = 0;
  double train_rmse = 0.0;
  double val_rmse = 0.0;  // NaN when no validation set was given
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLoss> history;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

// Mini-batch Adam on the MSE objective with a seeded per-epoch shuffle.
// Single-threaded and bitwise reproducible for a fixed seed.
TrainResult train(const FeatureSet& train_set, const FeatureSet* val_set,
                  const TrainConfig& cfg, const NetworkTopology& topo,
                  const EpochCallback& on_epoch = {});

// RMSE of the network over a whole feature set.
double evaluate_rmse(const NetworkParams& p, const FeatureSet& set);

inline constexpr std::uint32_t kModelFileVersion = 1;

void save_model(const NetworkParams& p, const std::filesystem::path& path);
NetworkParams load_model(const std::filesystem::path& path);

void write_loss_csv(const std::vector<EpochLoss>& history, const std::filesystem::path& path);

}  // namespace hanr
