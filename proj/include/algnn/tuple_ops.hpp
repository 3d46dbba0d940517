#pragma once

#include <array>
#include <span>
#include <vector>

#include "algnn/algebra.hpp"

namespace algnn {

/// One algebra element, length = algebra dim.
using Tuple = std::vector<double>;

/// Reference product: out[k] = sum over entries (i,j,k,s) of s * x[i] * y[j].
/// Evaluated in entry order; this is the path every fast kernel is checked
/// against.
void mul_generic(const StructureTable& table, std::span<const double> x,
                 std::span<const double> y, std::span<double> out);
Tuple mul_generic(const StructureTable& table, const Tuple& x, const Tuple& y);

/// acc[k] += product, same evaluation order as mul_generic.
void mul_accum(const StructureTable& table, const double* x, const double* y,
               double* acc);

Tuple add(const Tuple& x, const Tuple& y);
Tuple scale(double s, const Tuple& x);

/// Euclidean norm of the component vector (the Frobenius norm for matrix
/// algebras).
double tuple_norm(std::span<const double> x);

/// Multiplicative identity. Throws std::invalid_argument for cross3, which is
/// non-unital.
Tuple identity(const AlgebraId& algebra);

/// Regular representation: the dim x dim row-major matrix L with
/// L * y == mul_generic(x, y) for every y.
std::vector<double> left_mul_matrix(const StructureTable& table,
                                    std::span<const double> x);

struct Spectrum2x2 {
  std::array<double, 2> eig_mag;  // |lambda_1| >= |lambda_2|
  std::array<double, 2> sv;       // sigma_1 >= sigma_2 >= 0
  double det = 0.0;
};

/// Eigenvalue moduli, singular values, and determinant of the 2x2 matrix
/// (a, b, c, d) = [[a, b], [c, d]]. Complex-conjugate eigenvalue pairs are
/// reported by their common modulus sqrt(det).
Spectrum2x2 spectrum_2x2(std::span<const double> tuple);

}  // namespace algnn
