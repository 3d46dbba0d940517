#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "algnn/rng.hpp"
#include "algnn/tensor.hpp"

namespace algnn::data {

/// A training minibatch. Classification tasks fill x (Real tensor) and
/// labels; the byte-level text task fills tokens/labels with batch x seq
/// layout instead.
struct Batch {
  AlgebraTensor x;
  std::vector<int> tokens;
  std::vector<int> labels;
  std::size_t batch = 0;
  std::size_t seq = 0;
};

/// In-memory labelled point set, features row-major [count, features].
struct PointSet {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t count = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;

  Batch minibatch(Rng& rng, std::size_t batch_size) const;
  Batch full() const;
};

/// Interleaved class spirals in the plane (radius grows with angle).
PointSet make_spiral(std::size_t classes, std::size_t per_class, double noise,
                     std::uint64_t seed);

/// Isotropic Gaussian blobs with centers on a circle of radius 3.
PointSet make_blobs(std::size_t classes, std::size_t per_class, double stddev,
                    std::uint64_t seed);

/// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes,
/// 10000 records per file. Pixels map to [0, 1] by /255; images are stored
/// HWC (32 x 32 x 3).
struct Cifar10 {
  std::vector<float> images;  // [count, 32, 32, 3]
  std::vector<int> labels;
  std::size_t count = 0;

  static constexpr std::size_t kImage = 32;
  static constexpr std::size_t kRecordBytes = 3073;

  /// Loads one .bin file; throws with the byte offset on malformed input.
  static Cifar10 load_file(const std::string& path);
  /// Loads data_batch_1..5.bin (train) or test_batch.bin from a directory.
  static Cifar10 load_dir(const std::string& dir, bool train);

  /// Random 24x24 crop plus horizontal flip, seed-deterministic.
  Batch augmented_minibatch(Rng& rng, std::size_t batch_size) const;
  /// Full 32x32 images, no augmentation.
  Batch eval_batch(std::size_t offset, std::size_t batch_size) const;
};

/// Byte-level text stream for next-byte prediction.
struct ByteText {
  std::vector<std::uint8_t> bytes;

  static ByteText load_file(const std::string& path);

  /// Windows of seq+1 bytes: tokens are the first seq, labels the shifted
  /// targets.
  Batch minibatch(Rng& rng, std::size_t batch_size, std::size_t seq) const;
};

}  // namespace algnn::data
