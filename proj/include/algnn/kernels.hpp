#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "algnn/algebra.hpp"
#include "algnn/tuple_ops.hpp"

namespace algnn::kernels {

enum class Isa { kScalar, kAvx2 };

/// Best instruction set the CPU supports.
Isa detect_isa();

/// The instruction set kernels dispatch to. Defaults to detect_isa(), may be
/// forced down with the ALGNN_ISA env var ("scalar" or "avx2") or set_isa().
Isa active_isa();
void set_isa(Isa isa);
std::string isa_name(Isa isa);

/// Tuple-product counters, incremented by the dispatch wrappers when enabled.
/// `multiplies` advances by the algebra's per-product multiply count, so the
/// totals line up with the static cost model.
struct Counters {
  std::uint64_t tuple_products = 0;
  std::uint64_t multiplies = 0;
};

Counters& counters();
void reset_counters();
void set_counting(bool enabled);
bool counting_enabled();

/// out = x * y with the hand-specialized kernel for the algebra.
/// Matches mul_generic to within 4 ulps per component.
void mul_fast(const AlgebraId& algebra, const double* x, const double* y,
              double* out);
Tuple mul_fast(const AlgebraId& algebra, const Tuple& x, const Tuple& y);

/// acc (one tuple) += sum over t < n of a_t * b_t.
/// Strides are in doubles between consecutive tuple starts.
void contract(const AlgebraId& algebra, const double* a, std::ptrdiff_t a_stride,
              const double* b, std::ptrdiff_t b_stride, double* acc,
              std::size_t n);

/// acc_t += a * b_t for t < n, one fixed left operand.
void axpy(const AlgebraId& algebra, const double* a, const double* b,
          std::ptrdiff_t b_stride, double* acc, std::ptrdiff_t acc_stride,
          std::size_t n);

namespace detail {

using ProductFn = void (*)(int dim, const double* x, const double* y,
                           double* out);
using ContractFn = void (*)(int dim, const double* a, std::ptrdiff_t a_stride,
                            const double* b, std::ptrdiff_t b_stride,
                            double* acc, std::size_t n);
using AxpyFn = void (*)(int dim, const double* a, const double* b,
                        std::ptrdiff_t b_stride, double* acc,
                        std::ptrdiff_t acc_stride, std::size_t n);

struct KernelSet {
  ProductFn product = nullptr;
  ContractFn contract = nullptr;
  AxpyFn axpy = nullptr;
};

const KernelSet& scalar_kernels(AlgebraTag tag);
#ifdef ALGNN_HAVE_AVX2
// Returns nullptr for algebras without a vector variant.
const KernelSet* avx2_kernels(AlgebraTag tag);
#endif

}  // namespace detail

}  // namespace algnn::kernels
