#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cgc/network.hpp"

namespace cgc {

/// Per-feature affine map applied to every split: x' = (x − shift) / scale,
/// with features of zero scale mapped to 0.
struct Normalization {
  std::vector<double> shift;
  std::vector<double> scale;

  void apply(Matrix& inputs) const;
};

struct Dataset {
  std::string name;
  Batch train;
  Batch test;
  Normalization normalization;

  std::size_t num_classes() const;
};

/// Reads an IDX image file (magic 0x00000803) and label file (magic 0x00000801).
/// Pixels are scaled to [0, 1] and flattened row-major. Paths ending in .gz are decompressed.
Batch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Writes `batch` as IDX files; inputs must lie in [0, 1] and have rows·cols columns.
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const Batch& batch,
               std::size_t rows, std::size_t cols);

/// Seeded selection of n_train images from train-*-ubyte and n_test from t10k-*-ubyte
/// in `dir` (plain or .gz), followed by per-feature min-max normalization fitted on the train split.
Dataset mnist_subset(const std::filesystem::path& dir, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

enum class SyntheticKind { GaussianBlobs, TwoSpirals };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::GaussianBlobs;
  std::size_t n = 500;
  std::uint64_t seed = 0;
  std::size_t classes = 3;   ///< blobs only
  double separation = 10.0;  ///< blobs: distance between neighbouring centres, in units of the blob σ
  double noise = 0.2;        ///< spirals: Gaussian jitter
};

/// Labelled 2-D data, labels assigned round robin (balanced to ±1), 80/20
/// train/test split by seeded shuffle, z-scored with train statistics.
///
/// Blobs: unit-σ isotropic Gaussians centred on a circle around the origin, so
/// classes are separable by a bias-free linear map. Spirals: two interleaved
/// arms r = t, angle t + πc for t ∈ [π/2, 3π].
Dataset synthetic_dataset(const SyntheticSpec& spec);

}  // namespace cgc
