#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "snnlab/network.hpp"
#include "snnlab/rng.hpp"

namespace snnlab {

enum class InitKind { kLecun, kXavier, kKaiming, kNormal, kIkunV1, kIkunV2 };

std::string to_string(InitKind k);

struct InitScheme {
  InitKind kind = InitKind::kKaiming;
  double alpha = 2.0;      // ikun gain; alpha=2 makes ikun_v1 with a constant
                           // surrogate and unit input variance reduce to kaiming
  double fixed_std = 0.05;  // normal kind only

  void validate() const;
};

// Per parametric layer, the quantities the variance condition is built from.
struct CalibrationStats {
  std::size_t layer = 0;  // index into the network's layer list
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  double sigma_w = 0.0;
  double sigma_x2 = 1.0;  // input signal variance
  double mu_h = 0.0;      // pre-activation mean
  double sigma_h = 1.0;   // pre-activation signal std
  double ef2 = 1.0;       // E[f'(H)^2]
  double v_threshold = 1.0;
};

// Monte-Carlo estimate of E[f'(H)^2] with H ~ N(mu_h, sigma_h^2).
// Deterministic given the stream. n_samples >= 1000.
double estimate_ef2(const SurrogateSpec& s, double mu_h, double sigma_h, std::size_t n_samples,
                    RngStream& rng);

constexpr std::size_t kDefaultEf2Samples = 200000;

// Weight std for a layer:
//   lecun   sqrt(1/fan_in)
//   xavier  sqrt(2/(fan_in+fan_out))
//   kaiming sqrt(2/fan_in)
//   normal  fixed_std
//   ikun_v1 sqrt(alpha/(fan_in*sigma_x2*ef2))
//   ikun_v2 sqrt(alpha/((fan_in+fan_out)*sigma_x2*ef2))
double compute_sigma_w(const InitScheme& scheme, std::size_t fan_in, std::size_t fan_out, double sigma_x2,
                       double ef2);

// dense: (n_in, n_out); conv: (Cin*k*k, Cout*k*k). Other layers have no
// parameters and throw.
std::pair<std::size_t, std::size_t> fan_dims(const LayerSpec& layer);

// Draws every parametric layer's weights N(0, sigma_w^2) and zeroes biases.
//
// Without a calibration batch, analytic defaults apply (sigma_x2 = 1,
// mu_h = 0, sigma_h = 1) and thresholds are left untouched.
//
// With a calibration batch (shape = network input shape), layers are
// initialized in forward order: the batch is propagated in spiking mode
// through the already-initialized prefix as a constant-current sequence,
// the layer input's signal variance is measured, weights are tentatively
// drawn, then two refinement passes each measure (mu_h, sigma_h) on the
// membrane of the following spike layer, re-estimate ef2 from
// N(mu_h, sigma_h), recompute sigma_w and re-draw. The following spike
// layer's threshold is set to the final mu_h.
//
// Signal variance here means variance across the batch per (unit, timestep),
// averaged; mu_h is the pooled mean.
std::vector<CalibrationStats> initialize_network(Network& net, const InitScheme& scheme,
                                                 const SurrogateSpec& surrogate,
                                                 const Tensor* calib_batch, RngStream& rng);

// Batch-axis signal variance of a frame sequence (helper shared with the
// variance-propagation diagnostics).
double signal_variance(const std::vector<Tensor>& frames);
double pooled_mean(const std::vector<Tensor>& frames);

}  // namespace snnlab
