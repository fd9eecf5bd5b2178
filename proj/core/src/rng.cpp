#include "snnlab/rng.hpp"

#include <cmath>

namespace snnlab {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  state_ = mix(mix(seed) + kGamma * (stream_id + 1));
}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(mix(seed_ + kGamma * (stream_id_ + 1)), id);
}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  return mix(state_);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian(double mean, double std) {
  // u1 in (0,1] so the log is finite
  double u1 = 1.0 - next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + std * r * std::cos(2.0 * M_PI * u2);
}

double RngStream::next_rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

Tensor sample_gaussian(RngStream& rng, const Shape& shape, double mean, double std) {
  if (shape.empty()) throw ParameterError("sample_gaussian: shape must be nonempty");
  if (!std::isfinite(std) || std < 0.0) {
    throw ParameterError("sample_gaussian: std must be finite and >= 0, got " + std::to_string(std));
  }
  if (!std::isfinite(mean)) throw ParameterError("sample_gaussian: mean must be finite");
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.next_gaussian(mean, std);
  return t;
}

Tensor sample_rademacher(RngStream& rng, const Shape& shape) {
  if (shape.empty()) throw ParameterError("sample_rademacher: shape must be nonempty");
  Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.next_rademacher();
  return t;
}

}  // namespace snnlab
