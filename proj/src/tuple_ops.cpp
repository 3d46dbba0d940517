#include "algnn/tuple_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace algnn {

namespace {
void check_len(std::size_t got, int dim, const char* what) {
  if (got != static_cast<std::size_t>(dim))
    throw std::invalid_argument(std::string(what) +
                                ": tuple length does not match algebra dim");
}
}  // namespace

void mul_generic(const StructureTable& table, std::span<const double> x,
                 std::span<const double> y, std::span<double> out) {
  check_len(x.size(), table.dim, "mul");
  check_len(y.size(), table.dim, "mul");
  check_len(out.size(), table.dim, "mul");
  std::fill(out.begin(), out.end(), 0.0);
  for (const TableEntry& e : table.entries)
    out[e.k] += e.sign * x[e.i] * y[e.j];
}

Tuple mul_generic(const StructureTable& table, const Tuple& x, const Tuple& y) {
  Tuple out(table.dim, 0.0);
  mul_generic(table, x, y, out);
  return out;
}

void mul_accum(const StructureTable& table, const double* x, const double* y,
               double* acc) {
  for (const TableEntry& e : table.entries)
    acc[e.k] += e.sign * x[e.i] * y[e.j];
}

Tuple add(const Tuple& x, const Tuple& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("add: tuple length mismatch");
  Tuple out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

Tuple scale(double s, const Tuple& x) {
  Tuple out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
  return out;
}

double tuple_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

Tuple identity(const AlgebraId& algebra) {
  if (!algebra.unital())
    throw std::invalid_argument("identity: " + algebra.name() +
                                " has no multiplicative identity");
  const int dim = algebra.dim();
  Tuple e(dim, 0.0);
  switch (algebra.tag()) {
    case AlgebraTag::kReal:
    case AlgebraTag::kComplex:
    case AlgebraTag::kQuaternion:
    case AlgebraTag::kDual:
      e[0] = 1.0;
      break;
    case AlgebraTag::kDiagonal:
      std::fill(e.begin(), e.end(), 1.0);
      break;
    case AlgebraTag::kM2R:
    case AlgebraTag::kM3R:
    case AlgebraTag::kM4R: {
      const int n = algebra.param();
      for (int r = 0; r < n; ++r) e[r * n + r] = 1.0;
      break;
    }
    case AlgebraTag::kM2C: {
      e[0] = 1.0;  // Re of [0][0]
      e[6] = 1.0;  // Re of [1][1]
      break;
    }
    case AlgebraTag::kCross3:
      break;  // unreachable
  }
  return e;
}

std::vector<double> left_mul_matrix(const StructureTable& table,
                                    std::span<const double> x) {
  check_len(x.size(), table.dim, "left_mul_matrix");
  std::vector<double> m(static_cast<std::size_t>(table.dim) * table.dim, 0.0);
  for (const TableEntry& e : table.entries)
    m[static_cast<std::size_t>(e.k) * table.dim + e.j] += e.sign * x[e.i];
  return m;
}

Spectrum2x2 spectrum_2x2(std::span<const double> tuple) {
  check_len(tuple.size(), 4, "spectrum_2x2");
  const double a = tuple[0], b = tuple[1], c = tuple[2], d = tuple[3];
  Spectrum2x2 s;
  s.det = a * d - b * c;

  const double tr = a + d;
  const double disc = tr * tr - 4.0 * s.det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double l1 = std::abs((tr + root) / 2.0);
    const double l2 = std::abs((tr - root) / 2.0);
    s.eig_mag = {std::max(l1, l2), std::min(l1, l2)};
  } else {
    // Conjugate pair: |lambda|^2 = det (necessarily positive here).
    const double mag = std::sqrt(s.det);
    s.eig_mag = {mag, mag};
  }

  // Singular values from trace and determinant of A^T A.
  const double frob2 = a * a + b * b + c * c + d * d;
  const double gap2 =
      std::max(0.0, frob2 * frob2 - 4.0 * s.det * s.det);
  const double gap = std::sqrt(gap2);
  s.sv = {std::sqrt(std::max(0.0, (frob2 + gap) / 2.0)),
          std::sqrt(std::max(0.0, (frob2 - gap) / 2.0))};
  return s;
}

}  // namespace algnn
