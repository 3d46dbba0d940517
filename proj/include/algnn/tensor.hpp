#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "algnn/algebra.hpp"

namespace algnn {

/// Dense tensor of algebra tuples. `shape` lists the logical extents
/// (batch, spatial, channel); the tuple axis is implicit, innermost, and
/// contiguous, so data.size() == product(shape) * dim.
class AlgebraTensor {
 public:
  AlgebraTensor() = default;
  AlgebraTensor(AlgebraId algebra, std::vector<std::size_t> shape);
  AlgebraTensor(AlgebraId algebra, std::vector<std::size_t> shape,
                std::vector<double> data);

  static AlgebraTensor real_scalar(double v);

  const AlgebraId& algebra() const { return algebra_; }
  int dim() const { return algebra_.dim(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }

  /// Number of tuples (product of shape extents).
  std::size_t tuple_count() const { return tuples_; }
  /// Number of real scalars.
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double* tuple(std::size_t flat) { return data_.data() + flat * dim(); }
  const double* tuple(std::size_t flat) const {
    return data_.data() + flat * dim();
  }

  bool same_shape(const AlgebraTensor& other) const {
    return algebra_ == other.algebra_ && shape_ == other.shape_;
  }

  void fill(double v);
  bool all_finite() const;

  std::string shape_str() const;

 private:
  AlgebraId algebra_ = AlgebraId::real();
  std::vector<std::size_t> shape_;
  std::size_t tuples_ = 0;
  std::vector<double> data_;
};

/// Same algebra and shape, zero-filled.
AlgebraTensor zeros_like(const AlgebraTensor& t);

}  // namespace algnn
