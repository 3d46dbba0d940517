#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace algnn {

enum class AlgebraTag : std::uint8_t {
  kReal,
  kComplex,
  kQuaternion,
  kM2R,
  kM3R,
  kM4R,
  kM2C,
  kDual,
  kCross3,
  kDiagonal,
};

/// Identifies one multiplication rule. Diagonal carries its component count;
/// every other tag has a fixed tuple length.
class AlgebraId {
 public:
  constexpr AlgebraId() : tag_(AlgebraTag::kReal), n_(1) {}

  static constexpr AlgebraId real() { return {AlgebraTag::kReal, 1}; }
  static constexpr AlgebraId complex() { return {AlgebraTag::kComplex, 2}; }
  static constexpr AlgebraId quaternion() { return {AlgebraTag::kQuaternion, 4}; }
  static constexpr AlgebraId m2r() { return {AlgebraTag::kM2R, 2}; }
  static constexpr AlgebraId m3r() { return {AlgebraTag::kM3R, 3}; }
  static constexpr AlgebraId m4r() { return {AlgebraTag::kM4R, 4}; }
  static constexpr AlgebraId m2c() { return {AlgebraTag::kM2C, 2}; }
  static constexpr AlgebraId dual() { return {AlgebraTag::kDual, 2}; }
  static constexpr AlgebraId cross3() { return {AlgebraTag::kCross3, 3}; }
  static AlgebraId diagonal(int n) {
    if (n < 1) throw std::invalid_argument("diagonal algebra needs n >= 1");
    return {AlgebraTag::kDiagonal, n};
  }

  constexpr AlgebraTag tag() const { return tag_; }

  /// Tuple length: real 1, complex/dual 2, cross 3, quaternion/m2r 4,
  /// m2c 8, m3r 9, m4r 16, diagonal n.
  constexpr int dim() const {
    switch (tag_) {
      case AlgebraTag::kReal: return 1;
      case AlgebraTag::kComplex: return 2;
      case AlgebraTag::kQuaternion: return 4;
      case AlgebraTag::kM2R: return 4;
      case AlgebraTag::kM3R: return 9;
      case AlgebraTag::kM4R: return 16;
      case AlgebraTag::kM2C: return 8;
      case AlgebraTag::kDual: return 2;
      case AlgebraTag::kCross3: return 3;
      case AlgebraTag::kDiagonal: return n_;
    }
    return 0;
  }

  /// Side length for matrix algebras, component count for diagonal.
  constexpr int param() const { return n_; }

  /// The cross product algebra has no multiplicative identity.
  constexpr bool unital() const { return tag_ != AlgebraTag::kCross3; }

  constexpr bool associative() const { return tag_ != AlgebraTag::kCross3; }

  std::string name() const;
  static AlgebraId parse(std::string_view text);

  friend constexpr bool operator==(const AlgebraId& a, const AlgebraId& b) {
    return a.tag_ == b.tag_ && a.n_ == b.n_;
  }
  friend constexpr bool operator!=(const AlgebraId& a, const AlgebraId& b) {
    return !(a == b);
  }

 private:
  constexpr AlgebraId(AlgebraTag tag, int n) : tag_(tag), n_(n) {}

  AlgebraTag tag_;
  int n_;  // matrix side / diagonal component count; 2 for m2c (complex 2x2)
};

/// All supported algebras, diagonal instantiated at the given size.
std::vector<AlgebraId> all_algebras(int diagonal_n = 4);

/// One signed term of a bilinear product: out[k] += sign * x[i] * y[j].
struct TableEntry {
  std::uint16_t i = 0;
  std::uint16_t j = 0;
  std::uint16_t k = 0;
  std::int8_t sign = 1;

  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

/// Sparse signed structure constants defining one algebra's product.
/// Entries are unique in (i, j, k) and every index is below dim.
struct StructureTable {
  int dim = 0;
  std::vector<TableEntry> entries;

  /// Throws std::invalid_argument on duplicate (i,j,k) or out-of-range index.
  void validate() const;
};

/// The multiplication table for an algebra. Cached; the reference stays valid
/// for the lifetime of the process.
const StructureTable& structure_table(const AlgebraId& algebra);

/// Plain-text dump, one "i j k sign" line per entry, for cross-implementation
/// diffing.
void dump_table(const StructureTable& table, std::ostream& out);

/// Table computing d(x*y)/dy pullback: given g = out-adjoint and x, the
/// product adjoint_right(x, g)[j] = sum over forward entries (i,j,k,s) of
/// s * x[i] * g[k]. Returned as a structure table with x on the left.
StructureTable adjoint_right_table(const StructureTable& forward);

/// Table computing d(x*y)/dx pullback: adjoint_left(y, g)[i] =
/// sum over forward entries (i,j,k,s) of s * y[j] * g[k], y on the left.
StructureTable adjoint_left_table(const StructureTable& forward);

/// Cached per-algebra adjoint tables.
const StructureTable& adjoint_right_table(const AlgebraId& algebra);
const StructureTable& adjoint_left_table(const AlgebraId& algebra);

}  // namespace algnn
