#include "cgc/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <zlib.h>

namespace cgc {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw ParseError("cannot open " + path.string());
  std::vector<unsigned char> out;
  std::array<unsigned char, 1 << 16> chunk{};
  int got = 0;
  while ((got = gzread(f, chunk.data(), chunk.size())) > 0) out.insert(out.end(), chunk.begin(), chunk.begin() + got);
  const bool failed = got < 0;
  gzclose(f);
  if (failed) throw ParseError(path.string() + ": corrupt gzip stream");
  return out;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  if (path.extension() == ".gz") return read_gzip(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// `dir/name`, or its gzip-compressed sibling when only that exists.
std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& name) {
  const auto plain = dir / name;
  if (std::filesystem::exists(plain)) return plain;
  const auto gz = dir / (name + ".gz");
  return std::filesystem::exists(gz) ? gz : plain;
}

/// Raw IDX image/label pair, validated; pixels stay bytes until rows are picked.
struct IdxPair {
  std::vector<unsigned char> img;
  std::vector<unsigned char> lab;
  std::size_t n = 0;
  std::size_t dim = 0;

  Batch rows(const std::vector<std::size_t>& which) const {
    Batch batch{Matrix(which.size(), dim), std::vector<std::size_t>(which.size())};
    for (std::size_t i = 0; i < which.size(); ++i) {
      auto row = batch.inputs.row(i);
      const std::size_t k = which[i];
      for (std::size_t j = 0; j < dim; ++j) row[j] = img[16 + k * dim + j] / 255.0;
      batch.labels[i] = lab[8 + k];
    }
    return batch;
  }
};

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw ParseError(path.string() + ": truncated IDX header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                              static_cast<char>(v)};
  out.write(b.data(), 4);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Batch take_first(const Batch& all, const std::vector<std::size_t>& perm, std::size_t begin, std::size_t count) {
  std::vector<std::size_t> rows(perm.begin() + begin, perm.begin() + begin + count);
  return all.subset(rows);
}

std::vector<std::size_t> first_of(const std::vector<std::size_t>& perm, std::size_t count) {
  return {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(count)};
}

IdxPair read_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  IdxPair p{read_file(images), read_file(labels)};
  if (read_be32(p.img, 0, images) != kImageMagic) throw ParseError(images.string() + ": bad IDX image magic");
  if (read_be32(p.lab, 0, labels) != kLabelMagic) throw ParseError(labels.string() + ": bad IDX label magic");
  p.n = read_be32(p.img, 4, images);
  const std::size_t rows = read_be32(p.img, 8, images);
  const std::size_t cols = read_be32(p.img, 12, images);
  const std::size_t n_labels = read_be32(p.lab, 4, labels);
  if (p.n != n_labels) {
    throw ParseError("IDX count mismatch: " + std::to_string(p.n) + " images vs " + std::to_string(n_labels) +
                     " labels");
  }
  p.dim = rows * cols;
  if (p.img.size() < 16 + p.n * p.dim) throw ParseError(images.string() + ": truncated image data");
  if (p.lab.size() < 8 + p.n) throw ParseError(labels.string() + ": truncated label data");
  return p;
}

}  // namespace

void Normalization::apply(Matrix& inputs) const {
  if (shift.size() != inputs.cols() || scale.size() != inputs.cols()) {
    throw DimensionError("normalization fitted for a different feature count");
  }
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    auto row = inputs.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = scale[c] > 0.0 ? (row[c] - shift[c]) / scale[c] : 0.0;
  }
}

std::size_t Dataset::num_classes() const {
  std::size_t k = 0;
  for (auto y : train.labels) k = std::max(k, y + 1);
  for (auto y : test.labels) k = std::max(k, y + 1);
  return k;
}

Batch load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const IdxPair p = read_idx(images, labels);
  std::vector<std::size_t> all(p.n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return p.rows(all);
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const Batch& batch,
               std::size_t rows, std::size_t cols) {
  if (batch.inputs.cols() != rows * cols) throw DimensionError("write_idx: image size mismatch");
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw Error("write_idx: cannot open output files");
  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(batch.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  for (double v : batch.inputs.data()) img.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(batch.size()));
  for (auto y : batch.labels) lab.put(static_cast<char>(y));
}

Dataset mnist_subset(const std::filesystem::path& dir, std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  Dataset ds;
  ds.name = "mnist";
  {
    const IdxPair train_all =
        read_idx(find_idx(dir, "train-images-idx3-ubyte"), find_idx(dir, "train-labels-idx1-ubyte"));
    if (n_train > train_all.n) throw ConfigError("MNIST subset larger than the files in " + dir.string());
    ds.train = train_all.rows(first_of(seeded_permutation(train_all.n, seed), n_train));
  }
  const IdxPair test_all = read_idx(find_idx(dir, "t10k-images-idx3-ubyte"), find_idx(dir, "t10k-labels-idx1-ubyte"));
  if (n_test > test_all.n) throw ConfigError("MNIST subset larger than the files in " + dir.string());
  ds.test = test_all.rows(first_of(seeded_permutation(test_all.n, seed + 1), n_test));

  const std::size_t dim = ds.train.dim();
  ds.normalization.shift.assign(dim, 0.0);
  ds.normalization.scale.assign(dim, 0.0);
  for (std::size_t c = 0; c < dim; ++c) {
    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
      lo = std::min(lo, ds.train.inputs(i, c));
      hi = std::max(hi, ds.train.inputs(i, c));
    }
    if (hi > lo) {
      ds.normalization.shift[c] = lo;
      ds.normalization.scale[c] = hi - lo;
    }
  }
  ds.normalization.apply(ds.train.inputs);
  ds.normalization.apply(ds.test.inputs);
  return ds;
}

Dataset synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.n < 10) throw ConfigError("synthetic dataset needs at least 10 samples");
  const std::size_t classes = spec.kind == SyntheticKind::TwoSpirals ? 2 : spec.classes;
  if (classes < 2) throw ConfigError("synthetic dataset needs at least 2 classes");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Batch all{Matrix(spec.n, 2), std::vector<std::size_t>(spec.n)};
  const double pi = std::numbers::pi;
  if (spec.kind == SyntheticKind::GaussianBlobs) {
    const double radius = spec.separation / (2.0 * std::sin(pi / static_cast<double>(classes)));
    for (std::size_t i = 0; i < spec.n; ++i) {
      const std::size_t c = i % classes;
      const double angle = 2.0 * pi * static_cast<double>(c) / static_cast<double>(classes);
      all.inputs(i, 0) = radius * std::cos(angle) + normal(rng);
      all.inputs(i, 1) = radius * std::sin(angle) + normal(rng);
      all.labels[i] = c;
    }
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const std::size_t c = i % 2;
      const double t = pi / 2.0 + unit(rng) * 2.5 * pi;
      all.inputs(i, 0) = t * std::cos(t + pi * c) + spec.noise * normal(rng);
      all.inputs(i, 1) = t * std::sin(t + pi * c) + spec.noise * normal(rng);
      all.labels[i] = c;
    }
  }

  const auto perm = seeded_permutation(spec.n, spec.seed + 1);
  const std::size_t n_train = spec.n * 4 / 5;
  Dataset ds;
  ds.name = spec.kind == SyntheticKind::GaussianBlobs ? "gaussian_blobs" : "two_spirals";
  ds.train = take_first(all, perm, 0, n_train);
  ds.test = take_first(all, perm, n_train, spec.n - n_train);

  ds.normalization.shift.assign(2, 0.0);
  ds.normalization.scale.assign(2, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) mean += ds.train.inputs(i, c);
    mean /= static_cast<double>(n_train);
    double var = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) var += (ds.train.inputs(i, c) - mean) * (ds.train.inputs(i, c) - mean);
    ds.normalization.shift[c] = mean;
    ds.normalization.scale[c] = std::sqrt(var / static_cast<double>(n_train));
  }
  ds.normalization.apply(ds.train.inputs);
  ds.normalization.apply(ds.test.inputs);
  return ds;
}

}  // namespace cgc
