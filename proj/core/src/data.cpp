#include "snnlab/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "snnlab/rng.hpp"

namespace snnlab {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

struct GzFile {
  gzFile f = nullptr;
  explicit GzFile(const std::string& path) : f(gzopen(path.c_str(), "rb")) {}
  ~GzFile() {
    if (f) gzclose(f);
  }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;
};

std::uint32_t read_be_u32(gzFile f, const std::string& path) {
  unsigned char b[4];
  if (gzread(f, b, 4) != 4) throw FormatError("idx: truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Tensor load_idx(const std::string& path) {
  GzFile gz(path);
  if (!gz.f) throw FormatError("idx: cannot open " + path);

  const std::uint32_t magic = read_be_u32(gz.f, path);
  std::size_t n_dims;
  if (magic == kImageMagic) {
    n_dims = 3;
  } else if (magic == kLabelMagic) {
    n_dims = 1;
  } else {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", magic);
    throw FormatError("idx: bad magic " + std::string(buf) + " in " + path);
  }

  Shape shape(n_dims);
  std::size_t total = 1;
  for (auto& d : shape) {
    d = read_be_u32(gz.f, path);
    total *= d;
  }

  std::vector<unsigned char> raw(total);
  std::size_t got = 0;
  while (got < total) {
    const unsigned chunk =
        static_cast<unsigned>(std::min<std::size_t>(total - got, 1u << 24));
    const int r = gzread(gz.f, raw.data() + got, chunk);
    if (r <= 0) break;
    got += static_cast<std::size_t>(r);
  }
  if (got != total) {
    throw FormatError("idx: truncated payload in " + path + ": expected " + std::to_string(total) +
                      " bytes, got " + std::to_string(got));
  }

  Tensor t(shape);
  if (magic == kImageMagic) {
    for (std::size_t i = 0; i < total; ++i) t[i] = raw[i] / 255.0;
  } else {
    for (std::size_t i = 0; i < total; ++i) t[i] = raw[i];
  }
  return t;
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("idx: cannot open " + path + " for writing");
  auto be = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  be(kLabelMagic);
  be(static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    const unsigned char b = static_cast<unsigned char>(l);
    os.write(reinterpret_cast<const char*>(&b), 1);
  }
}

Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path) {
  Tensor imgs = load_idx(images_path);
  Tensor labs = load_idx(labels_path);
  if (imgs.ndim() != 3) throw FormatError("idx: " + images_path + " is not an image file");
  if (labs.ndim() != 1) throw FormatError("idx: " + labels_path + " is not a label file");
  if (imgs.dim(0) != labs.dim(0)) {
    throw FormatError("idx: image count " + std::to_string(imgs.dim(0)) + " != label count " +
                      std::to_string(labs.dim(0)));
  }
  Dataset d;
  d.images = imgs.reshaped({imgs.dim(0), 1, imgs.dim(1), imgs.dim(2)});
  d.labels.resize(labs.size());
  for (std::size_t i = 0; i < labs.size(); ++i) {
    const int l = static_cast<int>(labs[i]);
    if (l < 0 || l > 9) throw FormatError("idx: label " + std::to_string(l) + " out of range [0,9]");
    d.labels[i] = l;
  }
  return d;
}

std::string resolve_idx_path(const std::string& dir, const std::string& base) {
  namespace fs = std::filesystem;
  const std::string plain = dir + "/" + base;
  if (fs::exists(plain)) return plain;
  const std::string gz = plain + ".gz";
  if (fs::exists(gz)) return gz;
  throw FormatError("dataset file not found: tried " + plain + " and " + gz);
}

Dataset subset(const Dataset& data, std::size_t n, std::uint64_t seed) {
  const std::size_t total = data.size();
  if (n > total) {
    throw ParameterError("subset: requested " + std::to_string(n) + " of " + std::to_string(total));
  }
  if (n == total) return data;  // identity, original order
  std::array<std::vector<std::size_t>, 10> by_class;
  for (std::size_t i = 0; i < total; ++i) by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);

  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  RngStream rng(seed, 0xDA7A);
  for (std::size_t c = 0; c < 10; ++c) {
    std::size_t want = n / 10 + (c < n % 10 ? 1 : 0);
    auto& pool = by_class[c];
    if (want > pool.size()) {
      throw ParameterError("subset: class " + std::to_string(c) + " has only " +
                           std::to_string(pool.size()) + " items, need " + std::to_string(want));
    }
    // seeded partial Fisher-Yates, then the chosen prefix
    std::vector<std::size_t> idx = pool;
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<long>(want));
  }
  std::sort(chosen.begin(), chosen.end());

  const std::size_t h = data.images.dim(2), w = data.images.dim(3);
  Dataset out;
  out.images = Tensor({chosen.size(), 1, h, w});
  out.labels.resize(chosen.size());
  const std::size_t img_sz = h * w;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const double* src = data.images.data() + chosen[i] * img_sz;
    std::copy(src, src + img_sz, out.images.data() + i * img_sz);
    out.labels[i] = data.labels[chosen[i]];
  }
  return out;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t shuffle_seed, std::uint64_t epoch) {
  if (batch_size < 1) throw ParameterError("batches: batch_size must be >= 1");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  RngStream rng(shuffle_seed, 0xBA7C ^ epoch);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (n - i));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    out.emplace_back(perm.begin() + static_cast<long>(start), perm.begin() + static_cast<long>(end));
  }
  return out;
}

Dataset synthetic_dataset(std::size_t n, std::uint64_t seed, double noise_std) {
  if (n < 10) throw ParameterError("synthetic_dataset: need n >= 10");
  if (noise_std < 0.0) throw ParameterError("synthetic_dataset: noise_std must be >= 0");
  const std::size_t hw = 28;
  Dataset d;
  d.images = Tensor({n, 1, hw, hw});
  d.labels.resize(n);
  RngStream rng(seed, 0x5D47);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 10);
    d.labels[i] = c;
    const std::size_t r0 = 2 + 6 * static_cast<std::size_t>(c % 4);
    const std::size_t c0 = 2 + 6 * static_cast<std::size_t>(c / 4);
    double* img = d.images.data() + i * hw * hw;
    for (std::size_t y = 0; y < hw; ++y) {
      for (std::size_t x = 0; x < hw; ++x) {
        const bool in_block = y >= r0 && y < r0 + 7 && x >= c0 && x < c0 + 7;
        double v = (in_block ? 0.9 : 0.1) + rng.next_gaussian(0.0, noise_std);
        img[y * hw + x] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return d;
}

}  // namespace snnlab
