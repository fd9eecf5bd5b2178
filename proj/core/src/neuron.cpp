#include "snnlab/neuron.hpp"

#include <cmath>

namespace snnlab {

void NeuronSpec::validate() const {
  if (model == NeuronModel::kLIF && !(tau > 1.0)) {
    throw ParameterError("NeuronSpec: LIF requires tau > 1, got " + std::to_string(tau));
  }
  if (!(dt > 0.0)) throw ParameterError("NeuronSpec: dt must be > 0");
  if (!(capacitance > 0.0)) throw ParameterError("NeuronSpec: capacitance must be > 0");
  if (!std::isfinite(v_threshold) || !std::isfinite(v_reset)) {
    throw ParameterError("NeuronSpec: threshold and reset must be finite");
  }
}

double NeuronSpec::leak() const { return model == NeuronModel::kIF ? 1.0 : 1.0 - 1.0 / tau; }

double NeuronSpec::input_scale() const {
  return model == NeuronModel::kIF ? dt / capacitance : 1.0 / capacitance;
}

void SurrogateSpec::validate() const {
  if (kind != SurrogateKind::kConstant && !(alpha > 0.0)) {
    throw ParameterError("SurrogateSpec: alpha must be > 0, got " + std::to_string(alpha));
  }
}

double surrogate_value(const SurrogateSpec& s, double x) {
  switch (s.kind) {
    case SurrogateKind::kSigmoid: {
      const double ax = s.alpha * x;
      if (ax >= 0.0) return 1.0 / (1.0 + std::exp(-ax));
      const double e = std::exp(ax);
      return e / (1.0 + e);
    }
    case SurrogateKind::kAtan:
      return std::atan(M_PI * s.alpha * x / 2.0) / M_PI + 0.5;
    case SurrogateKind::kTriangular: {
      const double w = s.alpha;
      if (x <= -w) return 0.0;
      if (x >= w) return 1.0;
      return (x + w) / (2.0 * w);
    }
    case SurrogateKind::kConstant:
      return x;
  }
  return 0.0;
}

double surrogate_grad(const SurrogateSpec& s, double x) {
  switch (s.kind) {
    case SurrogateKind::kSigmoid: {
      const double v = surrogate_value(s, x);
      return s.alpha * v * (1.0 - v);
    }
    case SurrogateKind::kAtan: {
      const double u = M_PI * s.alpha * x / 2.0;
      return (s.alpha / 2.0) / (1.0 + u * u);
    }
    case SurrogateKind::kTriangular: {
      const double w = s.alpha;
      return std::fabs(x) <= w ? 1.0 / (2.0 * w) : 0.0;
    }
    case SurrogateKind::kConstant:
      return 1.0;
  }
  return 0.0;
}

StepResult step_neuron(const NeuronSpec& spec, const Tensor& v_prev, const Tensor& input_current) {
  require_same_shape(v_prev, input_current, "step_neuron");
  const double lam = spec.leak();
  const double in_scale = spec.input_scale();

  StepResult r{Tensor(v_prev.shape()), Tensor(v_prev.shape()), Tensor(v_prev.shape())};
  for (std::size_t i = 0; i < v_prev.size(); ++i) {
    const double h = lam * v_prev[i] + in_scale * input_current[i];
    const bool fired = h >= spec.v_threshold;
    r.h_pre[i] = h;
    r.spike[i] = fired ? 1.0 : 0.0;
    if (fired) {
      r.v_new[i] = spec.reset_mode == ResetMode::kHard ? spec.v_reset : h - spec.v_threshold;
    } else {
      r.v_new[i] = h;
    }
  }
  return r;
}

std::string to_string(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::kSigmoid: return "sigmoid";
    case SurrogateKind::kAtan: return "atan";
    case SurrogateKind::kTriangular: return "triangular";
    case SurrogateKind::kConstant: return "constant";
  }
  return "?";
}

std::string to_string(NeuronModel m) { return m == NeuronModel::kIF ? "if" : "lif"; }

}  // namespace snnlab
