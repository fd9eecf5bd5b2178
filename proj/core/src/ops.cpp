#include "snnlab/ops.hpp"

#include <Eigen/Core>

#include <string>

namespace snnlab {
namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

void check_conv_args(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad) {
  if (input.ndim() != 4 || kernel.ndim() != 4) {
    throw ShapeError("conv2d: expected 4-d input and kernel, got " + shape_str(input.shape()) + " and " +
                     shape_str(kernel.shape()));
  }
  if (kernel.dim(2) != kernel.dim(3)) {
    throw ShapeError("conv2d: kernel must be square, got " + shape_str(kernel.shape()));
  }
  if (input.dim(1) != kernel.dim(1)) {
    throw ShapeError("conv2d: input channels mismatch, input " + shape_str(input.shape()) + " vs kernel " +
                     shape_str(kernel.shape()));
  }
  if (bias.ndim() != 1 || bias.dim(0) != kernel.dim(0)) {
    throw ShapeError("conv2d: bias shape " + shape_str(bias.shape()) + " does not match kernel " +
                     shape_str(kernel.shape()));
  }
  if (stride < 1) throw ParameterError("conv2d: stride must be >= 1");
  if (pad < 0) throw ParameterError("conv2d: pad must be >= 0");
  const std::size_t k = kernel.dim(2);
  if (k > input.dim(2) + 2 * static_cast<std::size_t>(pad) ||
      k > input.dim(3) + 2 * static_cast<std::size_t>(pad)) {
    throw ShapeError("conv2d: kernel " + shape_str(kernel.shape()) + " larger than padded input " +
                     shape_str(input.shape()));
  }
}

// Gathers [Cin*k*k, Ho*Wo] patch matrix for one image.
void im2col(const double* img, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, int stride,
            int pad, std::size_t ho, std::size_t wo, double* col) {
  const std::size_t plane = h * w;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = col + ((c * k + ky) * k + kx) * (ho * wo);
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(h)) {
            for (std::size_t ox = 0; ox < wo; ++ox) row[oy * wo + ox] = 0.0;
            continue;
          }
          const double* src = img + c * plane + static_cast<std::size_t>(iy) * w;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
            row[oy * wo + ox] = (ix < 0 || ix >= static_cast<long>(w)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

// Scatter-add transpose of im2col.
void col2im(const double* col, std::size_t cin, std::size_t h, std::size_t w, std::size_t k, int stride,
            int pad, std::size_t ho, std::size_t wo, double* img) {
  const std::size_t plane = h * w;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* row = col + ((c * k + ky) * k + kx) * (ho * wo);
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(h)) continue;
          double* dst = img + c * plane + static_cast<std::size_t>(iy) * w;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
            if (ix >= 0 && ix < static_cast<long>(w)) dst[ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, int stride, int pad) {
  check_conv_args(input, kernel, bias, stride, pad);
  const std::size_t b = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  const std::size_t ho = (h + 2 * pad - k) / stride + 1;
  const std::size_t wo = (w + 2 * pad - k) / stride + 1;

  Tensor out({b, cout, ho, wo});
  std::vector<double> col(cin * k * k * ho * wo);
  ConstMapRM km(kernel.data(), static_cast<long>(cout), static_cast<long>(cin * k * k));
  for (std::size_t i = 0; i < b; ++i) {
    im2col(input.data() + i * cin * h * w, cin, h, w, k, stride, pad, ho, wo, col.data());
    ConstMapRM cm(col.data(), static_cast<long>(cin * k * k), static_cast<long>(ho * wo));
    MapRM om(out.data() + i * cout * ho * wo, static_cast<long>(cout), static_cast<long>(ho * wo));
    om.noalias() = km * cm;
    for (std::size_t co = 0; co < cout; ++co) om.row(static_cast<long>(co)).array() += bias[co];
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const Tensor& d_out, int stride,
                            int pad) {
  const std::size_t b = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  const std::size_t ho = (h + 2 * pad - k) / stride + 1;
  const std::size_t wo = (w + 2 * pad - k) / stride + 1;
  if (d_out.shape() != Shape{b, cout, ho, wo}) {
    throw ShapeError("conv2d_backward: upstream gradient " + shape_str(d_out.shape()) +
                     " does not match output " + shape_str({b, cout, ho, wo}));
  }

  Conv2dGrads g{Tensor(input.shape()), Tensor(kernel.shape()), Tensor({cout})};
  std::vector<double> col(cin * k * k * ho * wo);
  std::vector<double> dcol(cin * k * k * ho * wo);
  ConstMapRM km(kernel.data(), static_cast<long>(cout), static_cast<long>(cin * k * k));
  MapRM dkm(g.d_kernel.data(), static_cast<long>(cout), static_cast<long>(cin * k * k));
  for (std::size_t i = 0; i < b; ++i) {
    im2col(input.data() + i * cin * h * w, cin, h, w, k, stride, pad, ho, wo, col.data());
    ConstMapRM cm(col.data(), static_cast<long>(cin * k * k), static_cast<long>(ho * wo));
    ConstMapRM dom(d_out.data() + i * cout * ho * wo, static_cast<long>(cout), static_cast<long>(ho * wo));
    dkm.noalias() += dom * cm.transpose();
    for (std::size_t co = 0; co < cout; ++co) g.d_bias[co] += dom.row(static_cast<long>(co)).sum();
    MapRM dcm(dcol.data(), static_cast<long>(cin * k * k), static_cast<long>(ho * wo));
    dcm.noalias() = km.transpose() * dom;
    col2im(dcol.data(), cin, h, w, k, stride, pad, ho, wo, g.d_input.data() + i * cin * h * w);
  }
  return g;
}

Pool2dResult pool2d(const Tensor& input, PoolKind kind, int size) {
  if (input.ndim() != 4) throw ShapeError("pool2d: expected 4-d input, got " + shape_str(input.shape()));
  if (size < 1) throw ParameterError("pool2d: size must be >= 1");
  const std::size_t b = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t s = static_cast<std::size_t>(size);
  if (h % s != 0 || w % s != 0) {
    throw ShapeError("pool2d: spatial dims of " + shape_str(input.shape()) + " not divisible by " +
                     std::to_string(size));
  }
  const std::size_t ho = h / s, wo = w / s;
  Pool2dResult res;
  res.output = Tensor({b, c, ho, wo});
  if (kind == PoolKind::kMax) res.argmax.resize(b * c * ho * wo);

  std::size_t oi = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* plane = input.data() + (i * c + ch) * h * w;
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox, ++oi) {
          if (kind == PoolKind::kMax) {
            double best = plane[oy * s * w + ox * s];
            std::size_t best_idx = oy * s * w + ox * s;
            for (std::size_t dy = 0; dy < s; ++dy) {
              for (std::size_t dx = 0; dx < s; ++dx) {
                const std::size_t idx = (oy * s + dy) * w + ox * s + dx;
                if (plane[idx] > best) {  // strict: first occurrence wins ties
                  best = plane[idx];
                  best_idx = idx;
                }
              }
            }
            res.output[oi] = best;
            res.argmax[oi] = static_cast<std::uint32_t>((i * c + ch) * h * w + best_idx);
          } else {
            double acc = 0.0;
            for (std::size_t dy = 0; dy < s; ++dy) {
              for (std::size_t dx = 0; dx < s; ++dx) acc += plane[(oy * s + dy) * w + ox * s + dx];
            }
            res.output[oi] = acc / static_cast<double>(s * s);
          }
        }
      }
    }
  }
  return res;
}

Tensor pool2d_backward(const Shape& input_shape, const Pool2dResult& fwd, PoolKind kind, int size,
                       const Tensor& d_out) {
  require_same_shape(d_out, fwd.output, "pool2d_backward");
  Tensor d_input(input_shape);
  if (kind == PoolKind::kMax) {
    for (std::size_t i = 0; i < d_out.size(); ++i) d_input[fwd.argmax[i]] += d_out[i];
    return d_input;
  }
  const std::size_t s = static_cast<std::size_t>(size);
  const std::size_t b = input_shape[0], c = input_shape[1], h = input_shape[2], w = input_shape[3];
  const std::size_t ho = h / s, wo = w / s;
  const double inv = 1.0 / static_cast<double>(s * s);
  std::size_t oi = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* plane = d_input.data() + (i * c + ch) * h * w;
      for (std::size_t oy = 0; oy < ho; ++oy) {
        for (std::size_t ox = 0; ox < wo; ++ox, ++oi) {
          const double v = d_out[oi] * inv;
          for (std::size_t dy = 0; dy < s; ++dy) {
            for (std::size_t dx = 0; dx < s; ++dx) plane[(oy * s + dy) * w + ox * s + dx] += v;
          }
        }
      }
    }
  }
  return d_input;
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (input.ndim() != 2 || weight.ndim() != 2 || input.dim(1) != weight.dim(1)) {
    throw ShapeError("dense: input " + shape_str(input.shape()) + " incompatible with weight " +
                     shape_str(weight.shape()));
  }
  if (bias.ndim() != 1 || bias.dim(0) != weight.dim(0)) {
    throw ShapeError("dense: bias " + shape_str(bias.shape()) + " incompatible with weight " +
                     shape_str(weight.shape()));
  }
  const std::size_t b = input.dim(0), n = input.dim(1), m = weight.dim(0);
  Tensor out({b, m});
  ConstMapRM im(input.data(), static_cast<long>(b), static_cast<long>(n));
  ConstMapRM wm(weight.data(), static_cast<long>(m), static_cast<long>(n));
  MapRM om(out.data(), static_cast<long>(b), static_cast<long>(m));
  om.noalias() = im * wm.transpose();
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.at2(i, j) += bias[j];
  }
  return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weight, const Tensor& d_out) {
  const std::size_t b = input.dim(0), n = input.dim(1), m = weight.dim(0);
  if (d_out.shape() != Shape{b, m}) {
    throw ShapeError("dense_backward: upstream gradient " + shape_str(d_out.shape()) +
                     " does not match output (" + std::to_string(b) + "," + std::to_string(m) + ")");
  }
  DenseGrads g{Tensor({b, n}), Tensor({m, n}), Tensor({m})};
  ConstMapRM im(input.data(), static_cast<long>(b), static_cast<long>(n));
  ConstMapRM wm(weight.data(), static_cast<long>(m), static_cast<long>(n));
  ConstMapRM dom(d_out.data(), static_cast<long>(b), static_cast<long>(m));
  MapRM dim(g.d_input.data(), static_cast<long>(b), static_cast<long>(n));
  MapRM dwm(g.d_weight.data(), static_cast<long>(m), static_cast<long>(n));
  dim.noalias() = dom * wm;
  dwm.noalias() = dom.transpose() * im;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < m; ++j) g.d_bias[j] += d_out.at2(i, j);
  }
  return g;
}

}  // namespace snnlab
