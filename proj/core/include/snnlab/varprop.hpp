#pragma once

#include <cstddef>
#include <vector>

#include "snnlab/init.hpp"
#include "snnlab/network.hpp"

namespace snnlab {

// Layerwise forward/backward variance of a randomly initialized spiking
// stack. forward_var is the signal variance of each level's membrane
// pre-activations; backward_var is the signal variance of the gradient
// arriving at each level's dense input under a unit-variance upstream
// gradient. Ratios are taken against level 1.
struct VarianceReport {
  struct LayerRow {
    double forward_var = 0.0;
    double backward_var = 0.0;
    double ratio_forward = 0.0;
    double ratio_backward = 0.0;
  };
  std::vector<LayerRow> layers;
};

// LIF with a short membrane memory keeps the constant-current first level
// and the spike-train deeper levels comparable.
NeuronSpec default_stack_neuron();

// Dense(width->width) -> Spike, repeated `depth` times. By default ikun
// kinds are initialized in calibration mode on a Gaussian batch drawn from
// rng and the rest analytically; `calibrate` overrides that choice.
Network build_stack(std::size_t depth, std::size_t width, const NeuronSpec& neuron,
                    const SurrogateSpec& surrogate, const InitScheme& scheme, RngStream& rng,
                    std::optional<bool> calibrate = std::nullopt);

// Spiking pass over T steps with the batch as constant current; backward
// injects a unit-variance Gaussian upstream gradient. batch is [B, width]
// with B >= 256.
VarianceReport measure_variances(Network& stack, const Tensor& batch, int time_steps, RngStream& rng);

}  // namespace snnlab
