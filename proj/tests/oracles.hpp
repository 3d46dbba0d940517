#pragma once

#include <vector>

#include "algnn/algebra.hpp"
#include "algnn/tuple_ops.hpp"

// Independent reference routes used only by tests. Nothing here may call the
// kernels it is checking.
namespace algnn::test {

/// Literal n x n real matrix multiply of row-major reshaped tuples.
Tuple matmul_oracle(int n, const Tuple& x, const Tuple& y);

/// 2x2 complex matrix multiply via std::complex.
Tuple m2c_oracle(const Tuple& x, const Tuple& y);

/// Complex product via std::complex.
Tuple complex_oracle(const Tuple& x, const Tuple& y);

/// Hamilton product written out from the classical i,j,k rules.
Tuple quaternion_oracle(const Tuple& x, const Tuple& y);

/// Componentwise product.
Tuple diagonal_oracle(const Tuple& x, const Tuple& y);

/// Classical coordinate cross product.
Tuple cross3_oracle(const Tuple& x, const Tuple& y);

/// Dual-number product (a, b) * (c, d) = (ac, ad + bc).
Tuple dual_oracle(const Tuple& x, const Tuple& y);

/// Dispatch to the matching oracle, or empty if none applies (real handled by
/// plain multiplication).
Tuple product_oracle(const AlgebraId& algebra, const Tuple& x, const Tuple& y);

}  // namespace algnn::test

#include "algnn/tensor.hpp"

namespace algnn::test {

/// Component-assembled linear layer: for each table entry (i, j, k, s) the
/// output component slice k accumulates s x (real linear of input slice j
/// against weight slice i). The tuple-level path must match this exactly (to
/// rounding).
AlgebraTensor rule_indexed_linear(const AlgebraTensor& x,
                                  const AlgebraTensor& weight,
                                  const AlgebraTensor* bias);

/// Component-assembled convolution built from real convolutions of component
/// slices.
AlgebraTensor rule_indexed_conv2d(const AlgebraTensor& x,
                                  const AlgebraTensor& weight,
                                  const AlgebraTensor* bias, int stride,
                                  int pad);

/// Direct 5-deep loop (batch, output position, output channel, window, rule)
/// using mul_generic per tuple product.
AlgebraTensor brute_conv2d(const AlgebraTensor& x, const AlgebraTensor& weight,
                           const AlgebraTensor* bias, int stride, int pad);

}  // namespace algnn::test
