#include "algnn/datasets.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace algnn::data {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Batch PointSet::minibatch(Rng& rng, std::size_t batch_size) const {
  Batch b;
  b.batch = batch_size;
  b.x = AlgebraTensor(AlgebraId::real(), {batch_size, n_features});
  b.labels.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t pick = rng.index(count);
    for (std::size_t f = 0; f < n_features; ++f)
      b.x.data()[i * n_features + f] = features[pick * n_features + f];
    b.labels[i] = labels[pick];
  }
  return b;
}

Batch PointSet::full() const {
  Batch b;
  b.batch = count;
  b.x = AlgebraTensor(
      AlgebraId::real(), {count, n_features},
      std::vector<double>(features.begin(), features.end()));
  b.labels = labels;
  return b;
}

PointSet make_spiral(std::size_t classes, std::size_t per_class, double noise,
                     std::uint64_t seed) {
  PointSet set;
  set.count = classes * per_class;
  set.n_features = 2;
  set.n_classes = classes;
  set.features.resize(set.count * 2);
  set.labels.resize(set.count);
  Rng rng(seed);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = k * per_class + i;
      const double r =
          static_cast<double>(i) / static_cast<double>(per_class - 1);
      const double theta = 2.0 * kPi * static_cast<double>(k) /
                               static_cast<double>(classes) +
                           r * 3.0 * kPi + noise * rng.normal();
      set.features[row * 2 + 0] = r * std::sin(theta);
      set.features[row * 2 + 1] = r * std::cos(theta);
      set.labels[row] = static_cast<int>(k);
    }
  }
  return set;
}

PointSet make_blobs(std::size_t classes, std::size_t per_class, double stddev,
                    std::uint64_t seed) {
  PointSet set;
  set.count = classes * per_class;
  set.n_features = 2;
  set.n_classes = classes;
  set.features.resize(set.count * 2);
  set.labels.resize(set.count);
  Rng rng(seed);
  for (std::size_t k = 0; k < classes; ++k) {
    const double angle =
        2.0 * kPi * static_cast<double>(k) / static_cast<double>(classes);
    const double cx = 3.0 * std::cos(angle);
    const double cy = 3.0 * std::sin(angle);
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t row = k * per_class + i;
      set.features[row * 2 + 0] = cx + stddev * rng.normal();
      set.features[row * 2 + 1] = cy + stddev * rng.normal();
      set.labels[row] = static_cast<int>(k);
    }
  }
  return set;
}

Cifar10 Cifar10::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cifar10: cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff length = in.tellg();
  in.seekg(0);
  if (length <= 0 || length % static_cast<std::streamoff>(kRecordBytes) != 0)
    throw std::runtime_error(
        "cifar10: " + path + " length " + std::to_string(length) +
        " is not a multiple of " + std::to_string(kRecordBytes) +
        " (first partial record at byte offset " +
        std::to_string((length / kRecordBytes) * kRecordBytes) + ")");
  const std::size_t records = static_cast<std::size_t>(length) / kRecordBytes;

  Cifar10 data;
  data.count = records;
  data.images.resize(records * kImage * kImage * 3);
  data.labels.resize(records);
  std::vector<unsigned char> record(kRecordBytes);
  for (std::size_t r = 0; r < records; ++r) {
    if (!in.read(reinterpret_cast<char*>(record.data()), kRecordBytes))
      throw std::runtime_error("cifar10: short read at byte offset " +
                               std::to_string(r * kRecordBytes));
    const int label = record[0];
    if (label > 9)
      throw std::runtime_error("cifar10: invalid label at byte offset " +
                               std::to_string(r * kRecordBytes));
    data.labels[r] = label;
    // File stores channel planes (R, G, B), each 32x32 row-major.
    float* img = data.images.data() + r * kImage * kImage * 3;
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < kImage; ++y)
        for (std::size_t x = 0; x < kImage; ++x)
          img[(y * kImage + x) * 3 + c] =
              static_cast<float>(record[1 + c * 1024 + y * kImage + x]) / 255.0f;
  }
  return data;
}

Cifar10 Cifar10::load_dir(const std::string& dir, bool train) {
  Cifar10 all;
  const std::vector<std::string> names =
      train ? std::vector<std::string>{"data_batch_1.bin", "data_batch_2.bin",
                                       "data_batch_3.bin", "data_batch_4.bin",
                                       "data_batch_5.bin"}
            : std::vector<std::string>{"test_batch.bin"};
  for (const std::string& name : names) {
    Cifar10 part = load_file(dir + "/" + name);
    all.images.insert(all.images.end(), part.images.begin(), part.images.end());
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    all.count += part.count;
  }
  return all;
}

Batch Cifar10::augmented_minibatch(Rng& rng, std::size_t batch_size) const {
  constexpr std::size_t kCrop = 24;
  Batch b;
  b.batch = batch_size;
  b.x = AlgebraTensor(AlgebraId::real(), {batch_size, kCrop, kCrop, 3});
  b.labels.resize(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t pick = rng.index(count);
    const std::size_t oy = rng.index(kImage - kCrop + 1);
    const std::size_t ox = rng.index(kImage - kCrop + 1);
    const bool flip = rng.bernoulli(0.5);
    const float* img = images.data() + pick * kImage * kImage * 3;
    double* out = b.x.data() + i * kCrop * kCrop * 3;
    for (std::size_t y = 0; y < kCrop; ++y)
      for (std::size_t x = 0; x < kCrop; ++x) {
        const std::size_t sx = flip ? (ox + kCrop - 1 - x) : (ox + x);
        for (std::size_t c = 0; c < 3; ++c)
          out[(y * kCrop + x) * 3 + c] =
              img[((oy + y) * kImage + sx) * 3 + c];
      }
    b.labels[i] = labels[pick];
  }
  return b;
}

Batch Cifar10::eval_batch(std::size_t offset, std::size_t batch_size) const {
  const std::size_t n = std::min(batch_size, count - offset);
  Batch b;
  b.batch = n;
  b.x = AlgebraTensor(AlgebraId::real(), {n, kImage, kImage, 3});
  b.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* img = images.data() + (offset + i) * kImage * kImage * 3;
    double* out = b.x.data() + i * kImage * kImage * 3;
    for (std::size_t p = 0; p < kImage * kImage * 3; ++p) out[p] = img[p];
    b.labels[i] = labels[offset + i];
  }
  return b;
}

ByteText ByteText::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("text: cannot open " + path);
  ByteText t;
  in.seekg(0, std::ios::end);
  const std::streamoff length = in.tellg();
  in.seekg(0);
  t.bytes.resize(static_cast<std::size_t>(length));
  if (length > 0 &&
      !in.read(reinterpret_cast<char*>(t.bytes.data()), length))
    throw std::runtime_error("text: short read from " + path);
  if (t.bytes.size() < 2)
    throw std::runtime_error("text: need at least 2 bytes in " + path);
  return t;
}

Batch ByteText::minibatch(Rng& rng, std::size_t batch_size,
                          std::size_t seq) const {
  if (bytes.size() < seq + 1)
    throw std::runtime_error("text: file shorter than one window");
  Batch b;
  b.batch = batch_size;
  b.seq = seq;
  b.tokens.resize(batch_size * seq);
  b.labels.resize(batch_size * seq);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t start = rng.index(bytes.size() - seq);
    for (std::size_t t = 0; t < seq; ++t) {
      b.tokens[i * seq + t] = bytes[start + t];
      b.labels[i * seq + t] = bytes[start + t + 1];
    }
  }
  return b;
}

}  // namespace algnn::data
