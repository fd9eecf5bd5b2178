#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnlab/tensor.hpp"

namespace snnlab {

// Images in [0,1], labels in [0,9]. Read-only after construction.
struct Dataset {
  Tensor images;  // [N,1,H,W]
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Reads one IDX file (plain or gzip, detected by the 0x1f 0x8b magic bytes).
// Image files (magic 0x00000803) come back with the header's dims and pixels
// scaled to [0,1]; label files (magic 0x00000801) come back as a flat vector.
Tensor load_idx(const std::string& path);

// Writes an uncompressed IDX label file (magic 0x00000801).
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

// Pairs an image file with its label file into a Dataset.
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path);

// Returns `dir/base` if it exists, else `dir/base.gz`; throws with the
// attempted paths otherwise.
std::string resolve_idx_path(const std::string& dir, const std::string& base);

// Class-stratified seeded sample of n items: floor(n/10) per class, the
// remainder assigned to the lowest class indices. Selected indices are
// emitted in their original order.
Dataset subset(const Dataset& data, std::size_t n, std::uint64_t seed);

// Seeded permutation keyed on (shuffle_seed, epoch), chunked into batches;
// the last partial batch is kept.
std::vector<std::vector<std::size_t>> batches(std::size_t n, std::size_t batch_size,
                                              std::uint64_t shuffle_seed, std::uint64_t epoch);

// 10-class linearly separable corpus: class c is a 7x7 bright block at a
// class-indexed position on a dim background, plus seeded Gaussian noise
// clipped to [0,1].
Dataset synthetic_dataset(std::size_t n, std::uint64_t seed, double noise_std = 0.02);

}  // namespace snnlab
