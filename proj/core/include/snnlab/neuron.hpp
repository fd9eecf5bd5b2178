#pragma once

#include <string>

#include "snnlab/tensor.hpp"

namespace snnlab {

enum class NeuronModel { kIF, kLIF };
enum class ResetMode { kHard, kSoft };

struct NeuronSpec {
  NeuronModel model = NeuronModel::kLIF;
  double tau = 2.0;  // LIF only; leak factor (1 - 1/tau) must land in (0,1)
  double v_threshold = 1.0;
  double v_reset = 0.0;
  ResetMode reset_mode = ResetMode::kHard;
  double dt = 1.0;
  double capacitance = 1.0;

  void validate() const;
  // Multiplier on v_prev in the membrane update: (1 - 1/tau) for LIF, 1 for IF.
  double leak() const;
  // Multiplier on the input current: dt/C for IF, 1/C for LIF.
  double input_scale() const;
};

enum class SurrogateKind { kSigmoid, kAtan, kTriangular, kConstant };

struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::kSigmoid;
  // Sharpness for sigmoid/atan, half-width for triangular. Unused by constant.
  double alpha = 4.0;

  void validate() const;
};

// Smooth stand-in for the Heaviside step, used by the relaxed forward mode.
// sigmoid: 1/(1+exp(-a*x)); atan: arctan(pi*a*x/2)/pi + 1/2;
// triangular: ramp over [-w, w]; constant: identity (test-only).
double surrogate_value(const SurrogateSpec& s, double x);

// Exact derivative of surrogate_value. Even, nonnegative, integrates to 1
// over the reals for the first three kinds.
double surrogate_grad(const SurrogateSpec& s, double x);

struct StepResult {
  Tensor spike;  // entries exactly 0 or 1
  Tensor v_new;
  Tensor h_pre;  // membrane potential before thresholding
};

// One membrane update step:
//   IF:  h = v_prev + input*dt/C
//   LIF: h = (1 - 1/tau)*v_prev + input/C
// spike = 1[h >= v_threshold]; hard reset snaps spiked entries to v_reset,
// soft reset subtracts v_threshold.
StepResult step_neuron(const NeuronSpec& spec, const Tensor& v_prev, const Tensor& input_current);

std::string to_string(SurrogateKind k);
std::string to_string(NeuronModel m);

}  // namespace snnlab
