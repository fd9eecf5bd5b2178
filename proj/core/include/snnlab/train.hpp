#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snnlab/data.hpp"
#include "snnlab/network.hpp"

namespace snnlab {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 1e-3;  // sgd default is 0.1; the config layer fills this in
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 64;
  int epochs = 30;
  std::uint64_t seed = 42;
  double train_acc_threshold = 0.95;
  double test_acc_threshold = 0.91;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_loss = 0.0;
  double test_acc = 0.0;
};

// Mean over all B*C elements of (one_hot(label) - rate)^2 and its gradient
// 2*(rate - y)/(B*C).
std::pair<double, Tensor> mse_loss(const Tensor& rates, const std::vector<int>& labels);

// Fraction of rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Tensor& rates, const std::vector<int>& labels);

// Optimizer state over a flat parameter vector.
struct OptState {
  std::vector<double> m;  // sgd velocity / adam first moment
  std::vector<double> v;  // adam second moment
};

// v <- momentum*v + g; theta <- theta - lr*v
void sgd_step(std::vector<double>& params, const std::vector<double>& grads, OptState& state, double lr,
              double momentum);

// Bias-corrected Adam; t is the 1-based step count.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, OptState& state, double lr,
               double beta1, double beta2, double eps, int t);

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  int best_epoch = -1;  // -1 when no epoch ran
  double best_test_acc = 0.0;
  Network best_net;  // parameters at the best test accuracy
};

// Epoch loop: seeded shuffle, minibatch spiking forward + BPTT + optimizer
// step, then full train/test evaluation. The checkpoint file is rewritten
// whenever test accuracy strictly improves (path may be empty to skip
// writing).
TrainResult run_training(Network& net, const Dataset& train, const Dataset& test, const TrainConfig& cfg,
                         RngStream& rng, const std::string& checkpoint_path = "");

// Loss and accuracy of the network on a dataset, evaluated in spiking mode.
std::pair<double, double> evaluate(const Network& net, const Dataset& data, std::size_t batch_size,
                                   RngStream& rng);

// First epoch at which train_acc > train_thr and test_acc > test_thr hold
// simultaneously; nullopt when never.
std::optional<int> scheme1_epoch(const std::vector<EpochMetrics>& metrics, double train_thr,
                                 double test_thr);

// Epoch of maximum test accuracy (earliest on ties) and that accuracy.
std::pair<int, double> scheme2_best(const std::vector<EpochMetrics>& metrics);

// CSV with columns epoch,train_loss,train_acc,test_loss,test_acc at 9
// significant digits.
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics);

// Slice a dataset by batch indices.
std::pair<Tensor, std::vector<int>> gather_batch(const Dataset& data, const std::vector<std::size_t>& idx);

}  // namespace snnlab
