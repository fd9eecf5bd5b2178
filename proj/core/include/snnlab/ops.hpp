#pragma once

#include <cstdint>
#include <vector>

#include "snnlab/tensor.hpp"

namespace snnlab {

// 2-D cross-correlation (no kernel flip).
// input [B,Cin,H,W], kernel [Cout,Cin,k,k], bias [Cout] -> [B,Cout,H',W']
// with H' = (H + 2*pad - k)/stride + 1 (floor), likewise W'.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad);

struct Conv2dGrads {
  Tensor d_input;
  Tensor d_kernel;
  Tensor d_bias;
};

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& d_out, int stride,
                            int pad);

enum class PoolKind { kMax, kAvg };

struct Pool2dResult {
  Tensor output;
  // For max pooling: flat input index of the chosen element per output cell
  // (first occurrence in row-major scan on ties). Empty for avg.
  std::vector<std::uint32_t> argmax;
};

// Spatial dims must be divisible by size; no implicit padding.
Pool2dResult pool2d(const Tensor& input, PoolKind kind, int size);

Tensor pool2d_backward(const Shape& input_shape, const Pool2dResult& fwd, PoolKind kind, int size,
                       const Tensor& d_out);

// out = input * W^T + b.  input [B,n], W [m,n], b [m] -> [B,m]
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias);

struct DenseGrads {
  Tensor d_input;
  Tensor d_weight;
  Tensor d_bias;
};

DenseGrads dense_backward(const Tensor& input, const Tensor& weight, const Tensor& d_out);

}  // namespace snnlab
