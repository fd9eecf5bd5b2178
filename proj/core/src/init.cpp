#include "snnlab/init.hpp"

#include <algorithm>
#include <cmath>

namespace snnlab {

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::kLecun: return "lecun";
    case InitKind::kXavier: return "xavier";
    case InitKind::kKaiming: return "kaiming";
    case InitKind::kNormal: return "normal";
    case InitKind::kIkunV1: return "ikun_v1";
    case InitKind::kIkunV2: return "ikun_v2";
  }
  return "?";
}

void InitScheme::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("InitScheme: alpha must be finite and > 0");
  }
  if (!std::isfinite(fixed_std) || fixed_std < 0.0) {
    throw ParameterError("InitScheme: fixed_std must be finite and >= 0");
  }
}

double estimate_ef2(const SurrogateSpec& s, double mu_h, double sigma_h, std::size_t n_samples,
                    RngStream& rng) {
  if (n_samples < 1000) throw ParameterError("estimate_ef2: need n_samples >= 1000");
  if (!(sigma_h > 0.0)) throw ParameterError("estimate_ef2: sigma_h must be > 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double h = rng.next_gaussian(mu_h, sigma_h);
    const double g = surrogate_grad(s, h);
    acc += g * g;
  }
  return acc / static_cast<double>(n_samples);
}

double compute_sigma_w(const InitScheme& scheme, std::size_t fan_in, std::size_t fan_out, double sigma_x2,
                       double ef2) {
  if (fan_in == 0 || fan_out == 0) throw ParameterError("compute_sigma_w: fans must be positive");
  switch (scheme.kind) {
    case InitKind::kLecun:
      return std::sqrt(1.0 / static_cast<double>(fan_in));
    case InitKind::kXavier:
      return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    case InitKind::kKaiming:
      return std::sqrt(2.0 / static_cast<double>(fan_in));
    case InitKind::kNormal:
      return scheme.fixed_std;
    case InitKind::kIkunV1:
    case InitKind::kIkunV2: {
      if (!(sigma_x2 > 0.0) || !(ef2 > 0.0)) {
        throw ParameterError("compute_sigma_w: ikun needs sigma_x2 > 0 and ef2 > 0, got sigma_x2=" +
                             std::to_string(sigma_x2) + " ef2=" + std::to_string(ef2));
      }
      const double fan = scheme.kind == InitKind::kIkunV1 ? static_cast<double>(fan_in)
                                                          : static_cast<double>(fan_in + fan_out);
      return std::sqrt(scheme.alpha / (fan * sigma_x2 * ef2));
    }
  }
  throw ParameterError("compute_sigma_w: unknown scheme");
}

std::pair<std::size_t, std::size_t> fan_dims(const LayerSpec& layer) {
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    return {c->in_ch * c->k * c->k, c->out_ch * c->k * c->k};
  }
  if (const auto* d = std::get_if<DenseSpec>(&layer)) {
    return {d->n_in, d->n_out};
  }
  throw ParameterError("fan_dims: " + layer_name(layer) + " layer has no parameters");
}

double signal_variance(const std::vector<Tensor>& frames) {
  if (frames.empty()) return 0.0;
  const std::size_t b = frames[0].dim(0);
  const std::size_t rest = frames[0].size() / b;
  double acc = 0.0;
  for (const auto& f : frames) {
    for (std::size_t j = 0; j < rest; ++j) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        const double v = f[i * rest + j];
        s += v;
        s2 += v * v;
      }
      const double m = s / static_cast<double>(b);
      acc += s2 / static_cast<double>(b) - m * m;
    }
  }
  return acc / static_cast<double>(rest * frames.size());
}

double pooled_mean(const std::vector<Tensor>& frames) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.size(); ++i) acc += f[i];
    n += f.size();
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

namespace {

// Runs layers [0, upto) over the frame sequence in spiking mode and returns
// the sequence arriving at layer `upto`.
std::vector<Tensor> propagate_prefix(const Network& net, const std::vector<Tensor>& frames,
                                     std::size_t upto) {
  const auto shapes = infer_shapes(net.spec, frames[0].shape());
  std::vector<Tensor> state(upto);
  for (std::size_t l = 0; l < upto; ++l) {
    if (std::holds_alternative<SpikeSpec>(net.spec.layers[l])) state[l] = Tensor(shapes[l + 1]);
  }
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (const auto& frame : frames) {
    Tensor x = frame;
    for (std::size_t l = 0; l < upto; ++l) {
      const LayerSpec& spec = net.spec.layers[l];
      if (const auto* c = std::get_if<ConvSpec>(&spec)) {
        x = conv2d(x, net.params[l].weight, net.params[l].bias, c->stride, c->pad);
      } else if (std::get_if<DenseSpec>(&spec) != nullptr) {
        x = dense(x, net.params[l].weight, net.params[l].bias);
      } else if (const auto* p = std::get_if<PoolSpec>(&spec)) {
        x = pool2d(x, p->kind, p->size).output;
      } else if (const auto* s = std::get_if<SpikeSpec>(&spec)) {
        auto r = step_neuron(s->neuron, state[l], x);
        state[l] = std::move(r.v_new);
        x = std::move(r.spike);
      } else {
        x = x.reshaped(shapes[l + 1]);
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

// Index of the spike layer that consumes layer `l`'s output, crossing only
// non-parametric layers; nullopt when another parametric layer comes first.
std::optional<std::size_t> following_spike(const NetworkSpec& spec, std::size_t l) {
  for (std::size_t j = l + 1; j < spec.layers.size(); ++j) {
    if (std::holds_alternative<SpikeSpec>(spec.layers[j])) return j;
    if (layer_has_params(spec.layers[j])) return std::nullopt;
  }
  return std::nullopt;
}

// Runs layer l (and any non-parametric layers up to the following spike
// layer) over in_frames; returns the membrane pre-activations of that spike
// layer, or the linear outputs when no spike layer follows.
std::vector<Tensor> layer_preactivations(const Network& net, std::size_t l,
                                         std::optional<std::size_t> spike_idx,
                                         const std::vector<Tensor>& in_frames, double tentative_vth) {
  std::vector<Tensor> hs;
  hs.reserve(in_frames.size());
  Tensor v;
  for (const auto& frame : in_frames) {
    Tensor x = frame;
    const std::size_t stop = spike_idx ? *spike_idx : l + 1;
    for (std::size_t j = l; j < stop; ++j) {
      const LayerSpec& spec = net.spec.layers[j];
      if (const auto* c = std::get_if<ConvSpec>(&spec)) {
        x = conv2d(x, net.params[j].weight, net.params[j].bias, c->stride, c->pad);
      } else if (std::get_if<DenseSpec>(&spec) != nullptr) {
        x = dense(x, net.params[j].weight, net.params[j].bias);
      } else if (const auto* p = std::get_if<PoolSpec>(&spec)) {
        x = pool2d(x, p->kind, p->size).output;
      } else if (std::holds_alternative<FlattenSpec>(spec)) {
        std::size_t n = 1;
        for (std::size_t d = 1; d < x.ndim(); ++d) n *= x.dim(d);
        x = x.reshaped({x.dim(0), n});
      }
    }
    if (!spike_idx) {
      hs.push_back(std::move(x));
      continue;
    }
    const auto& sp = std::get<SpikeSpec>(net.spec.layers[*spike_idx]);
    NeuronSpec neuron = sp.neuron;
    neuron.v_threshold = tentative_vth;
    if (v.size() == 0) v = Tensor(x.shape());
    auto r = step_neuron(neuron, v, x);
    v = std::move(r.v_new);
    hs.push_back(std::move(r.h_pre));
  }
  return hs;
}

void draw_weights(Network& net, std::size_t l, double sigma_w, RngStream& rng) {
  Tensor& w = net.params[l].weight;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.next_gaussian(0.0, sigma_w);
  net.params[l].bias.fill(0.0);
}

}  // namespace

std::vector<CalibrationStats> initialize_network(Network& net, const InitScheme& scheme,
                                                 const SurrogateSpec& surrogate,
                                                 const Tensor* calib_batch, RngStream& rng) {
  scheme.validate();
  surrogate.validate();
  if (calib_batch != nullptr && (calib_batch->size() == 0 || calib_batch->dim(0) == 0)) {
    throw ParameterError("initialize_network: empty calibration batch");
  }

  std::vector<CalibrationStats> stats;

  if (calib_batch == nullptr) {
    // analytic mode: standardized-input defaults
    std::size_t param_idx = 0;
    for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
      if (!layer_has_params(net.spec.layers[l])) continue;
      const auto [fan_in, fan_out] = fan_dims(net.spec.layers[l]);
      RngStream ef2_rng = rng.substream(1000 + param_idx);
      const double ef2 = estimate_ef2(surrogate, 0.0, 1.0, kDefaultEf2Samples, ef2_rng);
      const double sw = compute_sigma_w(scheme, fan_in, fan_out, 1.0, ef2);
      draw_weights(net, l, sw, rng);
      CalibrationStats cs;
      cs.layer = l;
      cs.fan_in = fan_in;
      cs.fan_out = fan_out;
      cs.sigma_w = sw;
      cs.ef2 = ef2;
      auto fs = following_spike(net.spec, l);
      cs.v_threshold = fs ? std::get<SpikeSpec>(net.spec.layers[*fs]).neuron.v_threshold : 0.0;
      stats.push_back(cs);
      ++param_idx;
    }
    return stats;
  }

  // calibration mode: layer-sequential, constant-current framing of the batch
  const int T = net.spec.time_steps;
  std::vector<Tensor> input_frames(static_cast<std::size_t>(T), *calib_batch);

  std::size_t param_idx = 0;
  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    if (!layer_has_params(net.spec.layers[l])) continue;
    const auto [fan_in, fan_out] = fan_dims(net.spec.layers[l]);
    const auto in_frames = propagate_prefix(net, input_frames, l);
    const double sigma_x2 = signal_variance(in_frames);
    const auto spike_idx = following_spike(net.spec, l);

    CalibrationStats cs;
    cs.layer = l;
    cs.fan_in = fan_in;
    cs.fan_out = fan_out;
    cs.sigma_x2 = sigma_x2;

    // tentative draw from the analytic ef2
    RngStream ef2_rng0 = rng.substream(1000 + param_idx * 8);
    double ef2 = estimate_ef2(surrogate, 0.0, 1.0, kDefaultEf2Samples, ef2_rng0);
    double sw = compute_sigma_w(scheme, fan_in, fan_out, sigma_x2, ef2);
    draw_weights(net, l, sw, rng);

    double vth = spike_idx ? std::get<SpikeSpec>(net.spec.layers[*spike_idx]).neuron.v_threshold : 0.0;
    double mu_h = 0.0, sigma_h = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      const auto hs = layer_preactivations(net, l, spike_idx, in_frames, vth);
      mu_h = pooled_mean(hs);
      sigma_h = std::sqrt(std::max(signal_variance(hs), 1e-24));
      RngStream ef2_rng = rng.substream(1000 + param_idx * 8 + 1 + static_cast<std::size_t>(pass));
      ef2 = estimate_ef2(surrogate, mu_h, sigma_h, kDefaultEf2Samples, ef2_rng);
      sw = compute_sigma_w(scheme, fan_in, fan_out, sigma_x2, ef2);
      draw_weights(net, l, sw, rng);
      vth = mu_h;  // self-consistent tentative threshold for the next pass
    }

    cs.mu_h = mu_h;
    cs.sigma_h = sigma_h;
    cs.ef2 = ef2;
    cs.sigma_w = sw;
    if (spike_idx) {
      std::get<SpikeSpec>(net.spec.layers[*spike_idx]).neuron.v_threshold = mu_h;
      cs.v_threshold = mu_h;
    } else {
      cs.v_threshold = 0.0;
    }
    stats.push_back(cs);
    ++param_idx;
  }
  return stats;
}

}  // namespace snnlab
