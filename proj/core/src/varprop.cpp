#include "snnlab/varprop.hpp"

#include <cmath>

namespace snnlab {

NeuronSpec default_stack_neuron() {
  NeuronSpec n;
  n.model = NeuronModel::kLIF;
  n.tau = 1.5;
  n.v_threshold = 1.0;
  n.v_reset = 0.0;
  n.reset_mode = ResetMode::kHard;
  return n;
}

Network build_stack(std::size_t depth, std::size_t width, const NeuronSpec& neuron,
                    const SurrogateSpec& surrogate, const InitScheme& scheme, RngStream& rng,
                    std::optional<bool> calibrate) {
  if (depth < 2) throw ParameterError("build_stack: depth must be >= 2");
  if (width < 2) throw ParameterError("build_stack: width must be >= 2");

  NetworkSpec spec;
  spec.time_steps = 8;
  for (std::size_t d = 0; d < depth; ++d) {
    spec.layers.push_back(DenseSpec{width, width});
    spec.layers.push_back(SpikeSpec{neuron, surrogate});
  }
  Network net = make_network(std::move(spec));

  const bool ikun = scheme.kind == InitKind::kIkunV1 || scheme.kind == InitKind::kIkunV2;
  if (calibrate.value_or(ikun)) {
    RngStream batch_rng = rng.substream(0xCA11B);
    Tensor calib = sample_gaussian(batch_rng, {512, width}, 0.0, 1.0);
    RngStream init_rng = rng.substream(0x1A17);
    initialize_network(net, scheme, surrogate, &calib, init_rng);
  } else {
    RngStream init_rng = rng.substream(0x1A17);
    initialize_network(net, scheme, surrogate, nullptr, init_rng);
  }
  return net;
}

VarianceReport measure_variances(Network& stack, const Tensor& batch, int time_steps, RngStream& rng) {
  if (batch.ndim() != 2) throw ParameterError("measure_variances: batch must be [B, width]");
  if (batch.dim(0) < 256) {
    throw ParameterError("measure_variances: batch size " + std::to_string(batch.dim(0)) +
                         " too small, need >= 256");
  }
  if (time_steps < 1) throw ParameterError("measure_variances: time_steps must be >= 1");

  stack.spec.time_steps = time_steps;
  std::vector<Tensor> frames(static_cast<std::size_t>(time_steps), batch);
  auto res = forward_frames(stack, frames, ForwardMode::kSpiking);

  RngStream grad_rng = rng.substream(0x9AD);
  Tensor d_rates = sample_gaussian(grad_rng, res.rates.shape(), 0.0, 1.0);
  BackwardProbe probe;
  backward(stack, res.tape, d_rates, &probe);

  const std::size_t T = static_cast<std::size_t>(time_steps);
  VarianceReport report;
  for (std::size_t l = 0; l < stack.spec.layers.size(); ++l) {
    if (!std::holds_alternative<SpikeSpec>(stack.spec.layers[l])) continue;
    std::vector<Tensor> hs, gs;
    hs.reserve(T);
    gs.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
      hs.push_back(res.tape.steps[t][l].h);
      gs.push_back(probe.input_grads[t][l - 1]);  // gradient at the dense input
    }
    VarianceReport::LayerRow row;
    row.forward_var = signal_variance(hs);
    row.backward_var = signal_variance(gs);
    report.layers.push_back(row);
  }
  if (!report.layers.empty()) {
    const double f0 = report.layers.front().forward_var;
    const double b0 = report.layers.front().backward_var;
    for (auto& row : report.layers) {
      row.ratio_forward = f0 > 0.0 ? row.forward_var / f0 : 0.0;
      row.ratio_backward = b0 > 0.0 ? row.backward_var / b0 : 0.0;
    }
  }
  return report;
}

}  // namespace snnlab
