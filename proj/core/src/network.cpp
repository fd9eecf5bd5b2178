#include "snnlab/network.hpp"

#include <cmath>

namespace snnlab {

bool layer_has_params(const LayerSpec& l) {
  return std::holds_alternative<ConvSpec>(l) || std::holds_alternative<DenseSpec>(l);
}

std::string layer_name(const LayerSpec& l) {
  if (std::holds_alternative<ConvSpec>(l)) return "conv";
  if (std::holds_alternative<PoolSpec>(l)) return "pool";
  if (std::holds_alternative<DenseSpec>(l)) return "dense";
  if (std::holds_alternative<SpikeSpec>(l)) return "spike";
  return "flatten";
}

Shape layer_output_shape(const LayerSpec& l, const Shape& in) {
  if (const auto* c = std::get_if<ConvSpec>(&l)) {
    if (in.size() != 4 || in[1] != c->in_ch) {
      throw ShapeError("conv layer expects [B," + std::to_string(c->in_ch) + ",H,W], got " + shape_str(in));
    }
    const std::size_t hp = in[2] + 2 * static_cast<std::size_t>(c->pad);
    const std::size_t wp = in[3] + 2 * static_cast<std::size_t>(c->pad);
    if (c->k > hp || c->k > wp) {
      throw ShapeError("conv kernel k=" + std::to_string(c->k) + " larger than padded input " + shape_str(in));
    }
    return {in[0], c->out_ch, (hp - c->k) / static_cast<std::size_t>(c->stride) + 1,
            (wp - c->k) / static_cast<std::size_t>(c->stride) + 1};
  }
  if (const auto* p = std::get_if<PoolSpec>(&l)) {
    const auto s = static_cast<std::size_t>(p->size);
    if (in.size() != 4 || in[2] % s != 0 || in[3] % s != 0) {
      throw ShapeError("pool size " + std::to_string(p->size) + " does not divide input " + shape_str(in));
    }
    return {in[0], in[1], in[2] / s, in[3] / s};
  }
  if (const auto* d = std::get_if<DenseSpec>(&l)) {
    if (in.size() != 2 || in[1] != d->n_in) {
      throw ShapeError("dense layer expects [B," + std::to_string(d->n_in) + "], got " + shape_str(in));
    }
    return {in[0], d->n_out};
  }
  if (std::holds_alternative<FlattenSpec>(l)) {
    if (in.size() < 2) throw ShapeError("flatten expects batched input, got " + shape_str(in));
    std::size_t n = 1;
    for (std::size_t i = 1; i < in.size(); ++i) n *= in[i];
    return {in[0], n};
  }
  return in;  // spike: elementwise
}

std::vector<Shape> infer_shapes(const NetworkSpec& spec, const Shape& input_shape) {
  std::vector<Shape> shapes;
  shapes.reserve(spec.layers.size() + 1);
  shapes.push_back(input_shape);
  for (const auto& l : spec.layers) shapes.push_back(layer_output_shape(l, shapes.back()));
  return shapes;
}

Network make_network(NetworkSpec spec) {
  if (spec.time_steps < 1) throw ParameterError("NetworkSpec: time_steps must be >= 1");
  bool has_spike = false;
  for (const auto& l : spec.layers) {
    if (const auto* s = std::get_if<SpikeSpec>(&l)) {
      s->neuron.validate();
      s->surrogate.validate();
      has_spike = true;
    }
  }
  if (!has_spike) throw ParameterError("NetworkSpec: at least one spike layer required");

  Network net;
  net.params.reserve(spec.layers.size());
  for (const auto& l : spec.layers) {
    LayerParams p;
    if (const auto* c = std::get_if<ConvSpec>(&l)) {
      p.weight = Tensor({c->out_ch, c->in_ch, c->k, c->k});
      p.bias = Tensor({c->out_ch});
    } else if (const auto* d = std::get_if<DenseSpec>(&l)) {
      p.weight = Tensor({d->n_out, d->n_in});
      p.bias = Tensor({d->n_out});
    }
    net.params.push_back(std::move(p));
  }
  net.spec = std::move(spec);
  return net;
}

NetworkSpec default_conv_spec(const NeuronSpec& neuron, const SurrogateSpec& surrogate, int time_steps,
                              Encoder encoder) {
  NetworkSpec spec;
  spec.time_steps = time_steps;
  spec.encoder = encoder;
  spec.layers = {
      ConvSpec{1, 8, 3, 1, 1},    SpikeSpec{neuron, surrogate}, PoolSpec{PoolKind::kMax, 2},
      ConvSpec{8, 16, 3, 1, 1},   SpikeSpec{neuron, surrogate}, PoolSpec{PoolKind::kMax, 2},
      FlattenSpec{},              DenseSpec{16 * 7 * 7, 10},    SpikeSpec{neuron, surrogate},
  };
  return spec;
}

std::vector<Tensor> encode_input(const Tensor& images, int time_steps, Encoder mode, RngStream& rng) {
  if (time_steps < 1) throw ParameterError("encode_input: time_steps must be >= 1");
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!(images[i] >= 0.0 && images[i] <= 1.0)) {
      throw ParameterError("encode_input: pixel values must lie in [0,1], got " + std::to_string(images[i]));
    }
  }
  std::vector<Tensor> frames;
  frames.reserve(static_cast<std::size_t>(time_steps));
  for (int t = 0; t < time_steps; ++t) {
    if (mode == Encoder::kConstantCurrent) {
      frames.push_back(images);
    } else {
      Tensor f(images.shape());
      for (std::size_t i = 0; i < images.size(); ++i) f[i] = rng.next_uniform() < images[i] ? 1.0 : 0.0;
      frames.push_back(std::move(f));
    }
  }
  return frames;
}

namespace {

struct SpikeState {
  Tensor v;  // membrane potential, carried across timesteps
};

// Relaxed step: s = surrogate_value(h - v_th); reset applied with the smooth
// s so the map stays differentiable.
void spike_step(const SpikeSpec& sp, ForwardMode mode, const Tensor& input, Tensor& v, Tensor& h_out,
                Tensor& s_out) {
  const double lam = sp.neuron.leak();
  const double in_scale = sp.neuron.input_scale();
  const double vth = sp.neuron.v_threshold;
  const double vreset = sp.neuron.v_reset;
  const bool hard = sp.neuron.reset_mode == ResetMode::kHard;

  h_out = Tensor(input.shape());
  s_out = Tensor(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double h = lam * v[i] + in_scale * input[i];
    h_out[i] = h;
    if (mode == ForwardMode::kSpiking) {
      const bool fired = h >= vth;
      s_out[i] = fired ? 1.0 : 0.0;
      v[i] = fired ? (hard ? vreset : h - vth) : h;
    } else {
      const double s = surrogate_value(sp.surrogate, h - vth);
      s_out[i] = s;
      v[i] = hard ? vreset * s + h * (1.0 - s) : h - vth * s;
    }
  }
}

}  // namespace

ForwardResult forward_frames(const Network& net, const std::vector<Tensor>& frames, ForwardMode mode) {
  if (frames.empty()) throw ParameterError("forward_frames: no input frames");
  if (static_cast<int>(frames.size()) != net.spec.time_steps) {
    throw ParameterError("forward_frames: got " + std::to_string(frames.size()) + " frames, spec has T=" +
                         std::to_string(net.spec.time_steps));
  }
  const std::size_t num_layers = net.spec.layers.size();
  const auto shapes = infer_shapes(net.spec, frames[0].shape());
  const int T = net.spec.time_steps;

  ForwardResult res;
  res.tape.net = &net;
  res.tape.mode = mode;
  res.tape.time_steps = T;
  res.tape.boundary_shapes = shapes;
  res.tape.steps.resize(static_cast<std::size_t>(T));

  // membrane state per spike layer, zeroed at sequence start
  std::vector<SpikeState> state(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    if (std::holds_alternative<SpikeSpec>(net.spec.layers[l])) state[l].v = Tensor(shapes[l + 1]);
  }

  Tensor rates(shapes.back());
  for (int t = 0; t < T; ++t) {
    require_same_shape(frames[static_cast<std::size_t>(t)], frames[0], "forward_frames");
    Tensor x = frames[static_cast<std::size_t>(t)];
    auto& traces = res.tape.steps[static_cast<std::size_t>(t)];
    traces.resize(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
      const LayerSpec& spec = net.spec.layers[l];
      if (const auto* c = std::get_if<ConvSpec>(&spec)) {
        traces[l].input = x;
        x = conv2d(x, net.params[l].weight, net.params[l].bias, c->stride, c->pad);
      } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
        (void)d;
        traces[l].input = x;
        x = dense(x, net.params[l].weight, net.params[l].bias);
      } else if (const auto* p = std::get_if<PoolSpec>(&spec)) {
        traces[l].pool = pool2d(x, p->kind, p->size);
        x = traces[l].pool.output;
        if (p->kind == PoolKind::kAvg) traces[l].pool.output = Tensor();  // shape kept in boundary_shapes
      } else if (const auto* s = std::get_if<SpikeSpec>(&spec)) {
        Tensor h, out;
        spike_step(*s, mode, x, state[l].v, h, out);
        traces[l].h = std::move(h);
        x = out;
        traces[l].out = x;
      } else {
        x = x.reshaped(shapes[l + 1]);
      }
    }
    for (std::size_t i = 0; i < rates.size(); ++i) rates[i] += x[i];
  }
  const double inv_t = 1.0 / static_cast<double>(T);
  for (std::size_t i = 0; i < rates.size(); ++i) rates[i] *= inv_t;
  res.rates = std::move(rates);
  return res;
}

ForwardResult forward(const Network& net, const Tensor& images, ForwardMode mode, RngStream& rng) {
  auto frames = encode_input(images, net.spec.time_steps, net.spec.encoder, rng);
  return forward_frames(net, frames, mode);
}

Gradients backward(const Network& net, const Tape& tape, const Tensor& d_rates, BackwardProbe* probe) {
  if (tape.net != &net || tape.steps.empty() ||
      tape.steps[0].size() != net.spec.layers.size()) {
    throw UsageError("backward: tape does not belong to this network");
  }
  if (d_rates.shape() != tape.boundary_shapes.back()) {
    throw ShapeError("backward: d_rates shape " + shape_str(d_rates.shape()) + " does not match output " +
                     shape_str(tape.boundary_shapes.back()));
  }
  const std::size_t num_layers = net.spec.layers.size();
  const int T = tape.time_steps;
  const double inv_t = 1.0 / static_cast<double>(T);

  Gradients grads;
  grads.layers.resize(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    if (layer_has_params(net.spec.layers[l])) {
      grads.layers[l].weight = Tensor(net.params[l].weight.shape());
      grads.layers[l].bias = Tensor(net.params[l].bias.shape());
    }
  }

  // dL/dv_t carried backward across timesteps, per spike layer
  std::vector<Tensor> vcarry(num_layers);
  for (std::size_t l = 0; l < num_layers; ++l) {
    if (std::holds_alternative<SpikeSpec>(net.spec.layers[l])) vcarry[l] = Tensor(tape.boundary_shapes[l + 1]);
  }

  if (probe != nullptr) {
    probe->input_grads.assign(static_cast<std::size_t>(T), std::vector<Tensor>(num_layers));
  }

  for (int t = T - 1; t >= 0; --t) {
    const auto& traces = tape.steps[static_cast<std::size_t>(t)];
    Tensor delta = inv_t * d_rates;  // dL/d(output at step t) via the rate decoder
    for (std::size_t li = num_layers; li-- > 0;) {
      const LayerSpec& spec = net.spec.layers[li];
      if (const auto* s = std::get_if<SpikeSpec>(&spec)) {
        const Tensor& h = traces[li].h;
        const Tensor& out = traces[li].out;
        const double vth = s->neuron.v_threshold;
        const double vreset = s->neuron.v_reset;
        const bool hard = s->neuron.reset_mode == ResetMode::kHard;
        const double lam = s->neuron.leak();
        const double in_scale = s->neuron.input_scale();
        Tensor& carry = vcarry[li];
        Tensor dx(h.shape());
        for (std::size_t i = 0; i < h.size(); ++i) {
          const double g = surrogate_grad(s->surrogate, h[i] - vth);
          double dv_dh;
          if (tape.mode == ForwardMode::kSpiking) {
            dv_dh = hard ? 1.0 - out[i] : 1.0;  // reset branch detached
          } else {
            dv_dh = hard ? (1.0 - out[i]) + g * (vreset - h[i]) : 1.0 - vth * g;
          }
          const double dh = delta[i] * g + carry[i] * dv_dh;
          carry[i] = dh * lam;
          dx[i] = dh * in_scale;
        }
        delta = std::move(dx);
      } else if (const auto* c = std::get_if<ConvSpec>(&spec)) {
        auto g = conv2d_backward(traces[li].input, net.params[li].weight, delta, c->stride, c->pad);
        for (std::size_t i = 0; i < g.d_kernel.size(); ++i) grads.layers[li].weight[i] += g.d_kernel[i];
        for (std::size_t i = 0; i < g.d_bias.size(); ++i) grads.layers[li].bias[i] += g.d_bias[i];
        delta = std::move(g.d_input);
      } else if (std::get_if<DenseSpec>(&spec) != nullptr) {
        auto g = dense_backward(traces[li].input, net.params[li].weight, delta);
        for (std::size_t i = 0; i < g.d_weight.size(); ++i) grads.layers[li].weight[i] += g.d_weight[i];
        for (std::size_t i = 0; i < g.d_bias.size(); ++i) grads.layers[li].bias[i] += g.d_bias[i];
        delta = std::move(g.d_input);
      } else if (const auto* p = std::get_if<PoolSpec>(&spec)) {
        if (p->kind == PoolKind::kMax) {
          delta = pool2d_backward(tape.boundary_shapes[li], traces[li].pool, p->kind, p->size, delta);
        } else {
          Pool2dResult fwd;
          fwd.output = Tensor(tape.boundary_shapes[li + 1]);
          delta = pool2d_backward(tape.boundary_shapes[li], fwd, p->kind, p->size, delta);
        }
      } else {
        delta = delta.reshaped(tape.boundary_shapes[li]);
      }
      if (probe != nullptr) probe->input_grads[static_cast<std::size_t>(t)][li] = delta;
    }
  }
  return grads;
}

std::size_t param_count(const Network& net) {
  std::size_t n = 0;
  for (const auto& p : net.params) n += p.weight.size() + p.bias.size();
  return n;
}

std::vector<double> get_flat_params(const Network& net) {
  std::vector<double> theta;
  theta.reserve(param_count(net));
  for (const auto& p : net.params) {
    theta.insert(theta.end(), p.weight.data(), p.weight.data() + p.weight.size());
    theta.insert(theta.end(), p.bias.data(), p.bias.data() + p.bias.size());
  }
  return theta;
}

void set_flat_params(Network& net, const std::vector<double>& theta) {
  if (theta.size() != param_count(net)) {
    throw ParameterError("set_flat_params: expected " + std::to_string(param_count(net)) + " values, got " +
                         std::to_string(theta.size()));
  }
  std::size_t off = 0;
  for (auto& p : net.params) {
    for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] = theta[off++];
    for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] = theta[off++];
  }
}

std::vector<double> flatten_grads(const Network& net, const Gradients& g) {
  std::vector<double> flat;
  flat.reserve(param_count(net));
  for (std::size_t l = 0; l < net.params.size(); ++l) {
    const auto& gl = g.layers[l];
    flat.insert(flat.end(), gl.weight.data(), gl.weight.data() + gl.weight.size());
    flat.insert(flat.end(), gl.bias.data(), gl.bias.data() + gl.bias.size());
  }
  return flat;
}

}  // namespace snnlab
