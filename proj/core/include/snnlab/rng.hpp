#pragma once

#include <cstdint>

#include "snnlab/tensor.hpp"

namespace snnlab {

// Counter-based splitmix64 stream. A stream is fully determined by
// (seed, stream_id); distinct stream ids give statistically independent
// sequences, so per-layer / per-purpose streams can be drawn in any order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Derive an independent stream keyed on this stream's identity.
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  double next_uniform();  // [0, 1)
  // Box-Muller; consumes exactly two uniforms per sample.
  double next_gaussian(double mean, double std);
  double next_rademacher();  // -1 or +1

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t state_ = 0;
};

// std >= 0 required; shape must be nonempty.
Tensor sample_gaussian(RngStream& rng, const Shape& shape, double mean, double std);
Tensor sample_rademacher(RngStream& rng, const Shape& shape);

}  // namespace snnlab
