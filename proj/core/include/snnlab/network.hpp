#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "snnlab/neuron.hpp"
#include "snnlab/ops.hpp"
#include "snnlab/rng.hpp"
#include "snnlab/tensor.hpp"

namespace snnlab {

struct ConvSpec {
  std::size_t in_ch = 1, out_ch = 1, k = 3;
  int stride = 1, pad = 0;
};

struct PoolSpec {
  PoolKind kind = PoolKind::kMax;
  int size = 2;
};

struct DenseSpec {
  std::size_t n_in = 1, n_out = 1;
};

struct SpikeSpec {
  NeuronSpec neuron;
  SurrogateSpec surrogate;
};

struct FlattenSpec {};

using LayerSpec = std::variant<ConvSpec, PoolSpec, DenseSpec, SpikeSpec, FlattenSpec>;

bool layer_has_params(const LayerSpec& l);
std::string layer_name(const LayerSpec& l);

enum class Encoder { kConstantCurrent, kPoissonRate };
enum class Decoder { kFiringRate };

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  int time_steps = 4;
  Encoder encoder = Encoder::kConstantCurrent;
  Decoder decoder = Decoder::kFiringRate;
};

struct LayerParams {
  Tensor weight;
  Tensor bias;
};

// A NetworkSpec plus instantiated parameters. Parameter tensors are empty
// for non-parametric layers. Membrane state is per-forward-call, not stored.
struct Network {
  NetworkSpec spec;
  std::vector<LayerParams> params;
};

// Allocates zero-initialized parameters; requires at least one Spike layer.
Network make_network(NetworkSpec spec);

// Output shape of one layer given its input shape (throws ShapeError when
// the shapes do not compose).
Shape layer_output_shape(const LayerSpec& l, const Shape& in);

// Shapes at every layer boundary: result[0] = input shape,
// result[i+1] = output of layer i.
std::vector<Shape> infer_shapes(const NetworkSpec& spec, const Shape& input_shape);

// The two-conv-block architecture used by the CLI: Conv(1->8,k3,pad1), Spike,
// MaxPool2, Conv(8->16,k3,pad1), Spike, MaxPool2, Flatten, Dense(784->10),
// Spike; firing-rate decoding.
NetworkSpec default_conv_spec(const NeuronSpec& neuron, const SurrogateSpec& surrogate, int time_steps,
                              Encoder encoder);

// Rate encoding of images with pixel values in [0,1].
// constant_current: every frame equals the image.
// poisson_rate: frame entries are independent Bernoulli(pixel).
std::vector<Tensor> encode_input(const Tensor& images, int time_steps, Encoder mode, RngStream& rng);

enum class ForwardMode { kSpiking, kRelaxed };

// Everything backward() needs: per-(timestep, layer) inputs of parametric
// layers, pre-activations and outputs of spike layers, pooling argmaxes.
struct Tape {
  const Network* net = nullptr;
  ForwardMode mode = ForwardMode::kSpiking;
  int time_steps = 0;
  std::vector<Shape> boundary_shapes;

  struct LayerTrace {
    Tensor input;      // conv/dense
    Tensor h;          // spike
    Tensor out;        // spike output (binary or smooth)
    Pool2dResult pool;  // max pool argmax
  };
  // indexed [t][layer]
  std::vector<std::vector<LayerTrace>> steps;
};

struct ForwardResult {
  Tensor rates;  // [B, classes], spike counts / T
  Tape tape;
};

// Time-unrolled pass over pre-encoded frames. Membrane state starts at zero.
// Relaxed mode replaces the Heaviside with surrogate_value and applies the
// smooth-valued reset rule, making the whole map differentiable.
ForwardResult forward_frames(const Network& net, const std::vector<Tensor>& frames, ForwardMode mode);

// Encode then run. rng is only consumed by the poisson encoder.
ForwardResult forward(const Network& net, const Tensor& images, ForwardMode mode, RngStream& rng);

struct Gradients {
  std::vector<LayerParams> layers;  // aligned with Network::params
};

// When supplied to backward(), records the gradient arriving at each layer's
// input, per timestep: input_grads[t][layer].
struct BackwardProbe {
  std::vector<std::vector<Tensor>> input_grads;
};

// BPTT. In spiking mode the spike derivative is replaced by surrogate_grad
// and the reset branch is gradient-detached; in relaxed mode the gradients
// are the exact analytic gradients of the smooth forward map.
Gradients backward(const Network& net, const Tape& tape, const Tensor& d_rates,
                   BackwardProbe* probe = nullptr);

// Flat parameter-vector view, fixed layer order; used by optimizers and the
// curvature estimators.
std::size_t param_count(const Network& net);
std::vector<double> get_flat_params(const Network& net);
void set_flat_params(Network& net, const std::vector<double>& theta);
std::vector<double> flatten_grads(const Network& net, const Gradients& g);

// Binary checkpoint: magic "SPKL", version u32, parametric layer count, then
// per layer the weight and bias shapes and raw little-endian doubles.
// Round-trips bit-exactly.
void save_checkpoint(const Network& net, const std::string& path);
void load_checkpoint(Network& net, const std::string& path);

}  // namespace snnlab
