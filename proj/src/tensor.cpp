#include "algnn/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace algnn {

namespace {
std::size_t count_tuples(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}
}  // namespace

AlgebraTensor::AlgebraTensor(AlgebraId algebra, std::vector<std::size_t> shape)
    : algebra_(algebra),
      shape_(std::move(shape)),
      tuples_(count_tuples(shape_)),
      data_(tuples_ * algebra_.dim(), 0.0) {}

AlgebraTensor::AlgebraTensor(AlgebraId algebra, std::vector<std::size_t> shape,
                             std::vector<double> data)
    : algebra_(algebra),
      shape_(std::move(shape)),
      tuples_(count_tuples(shape_)),
      data_(std::move(data)) {
  if (data_.size() != tuples_ * static_cast<std::size_t>(algebra_.dim()))
    throw std::invalid_argument("tensor data length != tuples * dim");
}

AlgebraTensor AlgebraTensor::real_scalar(double v) {
  return AlgebraTensor(AlgebraId::real(), {}, {v});
}

void AlgebraTensor::fill(double v) {
  std::fill(data_.begin(), data_.end(), v);
}

bool AlgebraTensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string AlgebraTensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  s += "]x" + std::to_string(dim());
  return s;
}

AlgebraTensor zeros_like(const AlgebraTensor& t) {
  return AlgebraTensor(t.algebra(), t.shape());
}

}  // namespace algnn
