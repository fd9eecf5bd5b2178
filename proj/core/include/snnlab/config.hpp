#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "snnlab/hessian.hpp"
#include "snnlab/init.hpp"
#include "snnlab/network.hpp"
#include "snnlab/train.hpp"

namespace snnlab {

enum class DataSource { kIdx, kSynthetic };

// Everything one experiment needs; the CLI fills it from a config file plus
// --set overrides. Unknown keys are rejected with the nearest valid key.
struct ExperimentConfig {
  // data
  std::string data_dir = "data/fashion";
  DataSource data_source = DataSource::kIdx;
  std::size_t train_subset = 10000;
  std::size_t test_subset = 2000;

  // network
  int time_steps = 4;
  Encoder encoder = Encoder::kConstantCurrent;

  NeuronSpec neuron;        // lif tau=2, v_th=1, hard reset
  SurrogateSpec surrogate;  // sigmoid alpha=4
  InitScheme init;          // kaiming unless configured

  // data-driven layer-sequential calibration (default off: analytic mode)
  std::optional<bool> calibrate;
  std::size_t calib_batch = 256;

  TrainConfig train;
  std::optional<double> lr_override;  // train.lr if set; else per-optimizer default

  HessianSettings hessian;
  std::size_t hessian_batch = 512;

  std::size_t varprop_depth = 10;
  std::size_t varprop_width = 128;
  std::size_t varprop_batch = 512;
  int varprop_time_steps = 8;
  double varprop_tau = 1.5;

  std::string out_dir = "out";
  std::uint64_t seed = 42;

  bool calibration_enabled() const { return calibrate.value_or(false); }
  double effective_lr() const {
    if (lr_override) return *lr_override;
    return train.optimizer == OptimizerKind::kSgd ? 0.1 : 1e-3;
  }
};

// Applies one `key = value` assignment; throws ConfigError with the nearest
// valid key or the expected type / enum candidates.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Line-oriented `key = value` file; '#' starts a comment, blank lines are
// skipped. Unset keys keep their defaults.
ExperimentConfig parse_config_file(const std::string& path);

// All valid config keys (for help output and tests).
std::vector<std::string> config_keys();

// Parses values shared with CLI flags.
InitKind parse_init_kind(const std::string& v);
std::uint64_t parse_u64_value(const std::string& v, const std::string& key);

}  // namespace snnlab
