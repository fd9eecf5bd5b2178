#include <cstdint>
#include <cstring>
#include <fstream>

#include "snnlab/network.hpp"

namespace snnlab {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw FormatError("checkpoint: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw FormatError("checkpoint: truncated payload");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  std::uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void put_tensor(std::ostream& os, const Tensor& t) {
  put_u32(os, static_cast<std::uint32_t>(t.ndim()));
  for (std::size_t i = 0; i < t.ndim(); ++i) put_u64(os, t.dim(i));
  for (std::size_t i = 0; i < t.size(); ++i) put_f64(os, t[i]);
}

Shape get_tensor_shape(std::istream& is) {
  const std::uint32_t nd = get_u32(is);
  if (nd > 8) throw FormatError("checkpoint: implausible tensor rank " + std::to_string(nd));
  Shape s(nd);
  for (auto& d : s) d = get_u64(is);
  return s;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  std::uint32_t n_param_layers = 0;
  for (const auto& l : net.spec.layers) {
    if (layer_has_params(l)) ++n_param_layers;
  }
  put_u32(os, n_param_layers);
  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    if (!layer_has_params(net.spec.layers[l])) continue;
    put_tensor(os, net.params[l].weight);
    put_tensor(os, net.params[l].bias);
  }
  if (!os) throw FormatError("checkpoint: write failed for " + path);
}

void load_checkpoint(Network& net, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic in " + path);
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  std::vector<std::size_t> param_layers;
  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    if (layer_has_params(net.spec.layers[l])) param_layers.push_back(l);
  }
  const std::uint32_t count = get_u32(is);
  if (count != param_layers.size()) {
    throw FormatError("checkpoint: file has " + std::to_string(count) + " parametric layers, network has " +
                      std::to_string(param_layers.size()));
  }
  for (std::size_t li : param_layers) {
    for (Tensor* dst : {&net.params[li].weight, &net.params[li].bias}) {
      const Shape s = get_tensor_shape(is);
      if (s != dst->shape()) {
        throw FormatError("checkpoint: shape " + shape_str(s) + " in file does not match network shape " +
                          shape_str(dst->shape()));
      }
      for (std::size_t i = 0; i < dst->size(); ++i) (*dst)[i] = get_f64(is);
    }
  }
}

}  // namespace snnlab
