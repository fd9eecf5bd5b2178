#include "snnlab/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace snnlab {

void TrainConfig::validate() const {
  // lr = 0 is degenerate but exercised by the no-op training property
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("TrainConfig: lr must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) throw ParameterError("TrainConfig: momentum must be in [0,1)");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
    throw ParameterError("TrainConfig: betas must be in (0,1)");
  }
  if (batch_size < 1) throw ParameterError("TrainConfig: batch_size must be >= 1");
  if (epochs < 0) throw ParameterError("TrainConfig: epochs must be >= 0");
}

std::pair<double, Tensor> mse_loss(const Tensor& rates, const std::vector<int>& labels) {
  if (rates.ndim() != 2 || rates.dim(0) != labels.size()) {
    throw ShapeError("mse_loss: rates " + shape_str(rates.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = rates.dim(0), c = rates.dim(1);
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw ParameterError("mse_loss: label " + std::to_string(l) + " out of range [0," +
                           std::to_string(c - 1) + "]");
    }
  }
  const double n = static_cast<double>(b * c);
  double loss = 0.0;
  Tensor d_rates(rates.shape());
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double y = static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0;
      const double diff = rates.at2(i, j) - y;
      loss += diff * diff / n;
      d_rates.at2(i, j) = 2.0 * diff / n;
    }
  }
  return {loss, std::move(d_rates)};
}

double accuracy(const Tensor& rates, const std::vector<int>& labels) {
  if (rates.ndim() != 2 || rates.dim(0) != labels.size() || labels.empty()) {
    throw ShapeError("accuracy: rates " + shape_str(rates.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = rates.dim(0), c = rates.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t arg = 0;
    double best = rates.at2(i, 0);
    for (std::size_t j = 1; j < c; ++j) {
      if (rates.at2(i, j) > best) {  // strict: lowest index wins ties
        best = rates.at2(i, j);
        arg = j;
      }
    }
    if (arg == static_cast<std::size_t>(labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(b);
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grads, OptState& state, double lr,
              double momentum) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step: params/grads size mismatch");
  if (state.m.empty()) state.m.assign(params.size(), 0.0);
  if (state.m.size() != params.size()) throw ShapeError("sgd_step: state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = momentum * state.m[i] + grads[i];
    params[i] -= lr * state.m[i];
  }
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, OptState& state, double lr,
               double beta1, double beta2, double eps, int t) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: params/grads size mismatch");
  if (t < 1) throw ParameterError("adam_step: t must be >= 1");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state size mismatch");
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

std::pair<Tensor, std::vector<int>> gather_batch(const Dataset& data, const std::vector<std::size_t>& idx) {
  const std::size_t c = data.images.dim(1), h = data.images.dim(2), w = data.images.dim(3);
  const std::size_t img_sz = c * h * w;
  Tensor images({idx.size(), c, h, w});
  std::vector<int> labels(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* src = data.images.data() + idx[i] * img_sz;
    std::copy(src, src + img_sz, images.data() + i * img_sz);
    labels[i] = data.labels[idx[i]];
  }
  return {std::move(images), std::move(labels)};
}

std::pair<double, double> evaluate(const Network& net, const Dataset& data, std::size_t batch_size,
                                   RngStream& rng) {
  const std::size_t n = data.size();
  double loss_acc = 0.0;
  double correct_acc = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    auto [images, labels] = gather_batch(data, idx);
    RngStream enc_rng = rng.substream(0xE0A1 + start);
    auto res = forward(net, images, ForwardMode::kSpiking, enc_rng);
    loss_acc += mse_loss(res.rates, labels).first * static_cast<double>(labels.size());
    correct_acc += accuracy(res.rates, labels) * static_cast<double>(labels.size());
  }
  return {loss_acc / static_cast<double>(n), correct_acc / static_cast<double>(n)};
}

TrainResult run_training(Network& net, const Dataset& train, const Dataset& test, const TrainConfig& cfg,
                         RngStream& rng, const std::string& checkpoint_path) {
  cfg.validate();
  if (train.size() == 0) throw ParameterError("run_training: empty training set");

  TrainResult result;
  std::vector<double> theta = get_flat_params(net);
  OptState opt;
  int adam_t = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batch_lists = batches(train.size(), cfg.batch_size, cfg.seed, static_cast<std::uint64_t>(epoch));
    for (std::size_t bi = 0; bi < batch_lists.size(); ++bi) {
      auto [images, labels] = gather_batch(train, batch_lists[bi]);
      RngStream enc_rng =
          rng.substream((static_cast<std::uint64_t>(epoch) << 20) ^ static_cast<std::uint64_t>(bi));
      auto res = forward(net, images, ForwardMode::kSpiking, enc_rng);
      auto [loss, d_rates] = mse_loss(res.rates, labels);
      (void)loss;
      auto grads = backward(net, res.tape, d_rates);
      const std::vector<double> flat = flatten_grads(net, grads);
      if (cfg.optimizer == OptimizerKind::kSgd) {
        sgd_step(theta, flat, opt, cfg.lr, cfg.momentum);
      } else {
        adam_step(theta, flat, opt, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, ++adam_t);
      }
      set_flat_params(net, theta);
    }

    RngStream eval_rng = rng.substream(0x77AA00 + static_cast<std::uint64_t>(epoch));
    auto [train_loss, train_acc] = evaluate(net, train, cfg.batch_size, eval_rng);
    auto [test_loss, test_acc] = evaluate(net, test, cfg.batch_size, eval_rng);
    result.metrics.push_back({epoch, train_loss, train_acc, test_loss, test_acc});

    if (test_acc > result.best_test_acc || result.best_epoch < 0) {
      result.best_test_acc = test_acc;
      result.best_epoch = epoch;
      result.best_net = net;
      if (!checkpoint_path.empty()) save_checkpoint(net, checkpoint_path);
    }
  }
  return result;
}

std::optional<int> scheme1_epoch(const std::vector<EpochMetrics>& metrics, double train_thr,
                                 double test_thr) {
  for (const auto& m : metrics) {
    if (m.train_acc > train_thr && m.test_acc > test_thr) return m.epoch;
  }
  return std::nullopt;
}

std::pair<int, double> scheme2_best(const std::vector<EpochMetrics>& metrics) {
  if (metrics.empty()) throw ParameterError("scheme2_best: empty metrics");
  int best_epoch = metrics[0].epoch;
  double best = metrics[0].test_acc;
  for (const auto& m : metrics) {
    if (m.test_acc > best) {  // strict: earliest epoch wins ties
      best = m.test_acc;
      best_epoch = m.epoch;
    }
  }
  return {best_epoch, best};
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os << "epoch,train_loss,train_acc,test_loss,test_acc\n";
  char buf[160];
  for (const auto& m : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g\n", m.epoch, m.train_loss, m.train_acc,
                  m.test_loss, m.test_acc);
    os << buf;
  }
}

}  // namespace snnlab
