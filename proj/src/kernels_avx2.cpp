#ifdef ALGNN_HAVE_AVX2

#include <immintrin.h>

#include "algnn/kernels.hpp"

namespace algnn::kernels::detail {
namespace {

// f64 AVX2 variants. One register holds a whole dim-4 tuple (m2r, quaternion)
// or two dim-2 tuples (complex, dual). Strided access is free for the dim-4
// kernels; the packed-pair kernels require contiguous tuples and fall back to
// the scalar path otherwise.
//
// Deliberately mul+add rather than FMA, keeping the per-entry rounding and
// accumulation order of mul_generic so the fast path stays ulp-comparable to
// the reference even under cancellation.

inline __m256d flip(__m256d v, __m256d mask) { return _mm256_xor_pd(v, mask); }

// ---- m2r: (a,b,c,d) = [[a,b],[c,d]] --------------------------------------

inline __m256d m2r_product_accum(__m256d acc, __m256d w, __m256d x) {
  const __m256d w_low = _mm256_permute_pd(w, 0b0000);   // a a c c
  const __m256d w_high = _mm256_permute_pd(w, 0b1111);  // b b d d
  const __m256d x_row0 = _mm256_permute2f128_pd(x, x, 0x00);  // a b a b
  const __m256d x_row1 = _mm256_permute2f128_pd(x, x, 0x11);  // c d c d
  acc = _mm256_add_pd(acc, _mm256_mul_pd(w_low, x_row0));
  return _mm256_add_pd(acc, _mm256_mul_pd(w_high, x_row1));
}

void m2r_product(int, const double* x, const double* y, double* out) {
  __m256d acc = m2r_product_accum(_mm256_setzero_pd(), _mm256_loadu_pd(x),
                                  _mm256_loadu_pd(y));
  _mm256_storeu_pd(out, acc);
}

void m2r_contract(int, const double* a, std::ptrdiff_t a_stride,
                  const double* b, std::ptrdiff_t b_stride, double* acc,
                  std::size_t n) {
  __m256d v = _mm256_loadu_pd(acc);
  for (std::size_t t = 0; t < n; ++t)
    v = m2r_product_accum(v, _mm256_loadu_pd(a + t * a_stride),
                          _mm256_loadu_pd(b + t * b_stride));
  _mm256_storeu_pd(acc, v);
}

void m2r_axpy(int, const double* a, const double* b, std::ptrdiff_t b_stride,
              double* acc, std::ptrdiff_t acc_stride, std::size_t n) {
  const __m256d w = _mm256_loadu_pd(a);
  const __m256d w_low = _mm256_permute_pd(w, 0b0000);
  const __m256d w_high = _mm256_permute_pd(w, 0b1111);
  for (std::size_t t = 0; t < n; ++t) {
    const __m256d x = _mm256_loadu_pd(b + t * b_stride);
    __m256d v = _mm256_loadu_pd(acc + t * acc_stride);
    v = _mm256_add_pd(v, _mm256_mul_pd(w_low, _mm256_permute2f128_pd(x, x, 0x00)));
    v = _mm256_add_pd(v, _mm256_mul_pd(w_high, _mm256_permute2f128_pd(x, x, 0x11)));
    _mm256_storeu_pd(acc + t * acc_stride, v);
  }
}

// ---- quaternion -----------------------------------------------------------

struct QuatMasks {
  __m256d s1 = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);   // (-,+,-,+)
  __m256d s2 = _mm256_set_pd(-0.0, 0.0, 0.0, -0.0);   // (-,+,+,-)
  __m256d s3 = _mm256_set_pd(0.0, 0.0, -0.0, -0.0);   // (-,-,+,+)
};

inline __m256d quat_product_accum(__m256d acc, const double* w, __m256d x,
                                  const QuatMasks& m) {
  const __m256d p1 = _mm256_permute_pd(x, 0b0101);          // b a d c
  const __m256d p2 = _mm256_permute2f128_pd(x, x, 0x01);    // c d a b
  const __m256d p3 = _mm256_permute_pd(p2, 0b0101);         // d c b a
  acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(w + 0), x));
  acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(w + 1), flip(p1, m.s1)));
  acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(w + 2), flip(p2, m.s2)));
  return _mm256_add_pd(acc, _mm256_mul_pd(_mm256_broadcast_sd(w + 3), flip(p3, m.s3)));
}

void quat_product(int, const double* x, const double* y, double* out) {
  const QuatMasks m;
  __m256d acc =
      quat_product_accum(_mm256_setzero_pd(), x, _mm256_loadu_pd(y), m);
  _mm256_storeu_pd(out, acc);
}

void quat_contract(int, const double* a, std::ptrdiff_t a_stride,
                   const double* b, std::ptrdiff_t b_stride, double* acc,
                   std::size_t n) {
  const QuatMasks m;
  __m256d v = _mm256_loadu_pd(acc);
  for (std::size_t t = 0; t < n; ++t)
    v = quat_product_accum(v, a + t * a_stride,
                           _mm256_loadu_pd(b + t * b_stride), m);
  _mm256_storeu_pd(acc, v);
}

void quat_axpy(int, const double* a, const double* b, std::ptrdiff_t b_stride,
               double* acc, std::ptrdiff_t acc_stride, std::size_t n) {
  const QuatMasks m;
  for (std::size_t t = 0; t < n; ++t) {
    __m256d v = _mm256_loadu_pd(acc + t * acc_stride);
    v = quat_product_accum(v, a, _mm256_loadu_pd(b + t * b_stride), m);
    _mm256_storeu_pd(acc + t * acc_stride, v);
  }
}

// ---- complex / dual: two tuples per register ------------------------------

const __m256d kSwapSign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);  // (-,+,-,+)

void complex_contract(int dim, const double* a, std::ptrdiff_t a_stride,
                      const double* b, std::ptrdiff_t b_stride, double* acc,
                      std::size_t n) {
  if (a_stride != 2 || b_stride != 2) {
    scalar_kernels(AlgebraTag::kComplex).contract(dim, a, a_stride, b, b_stride,
                                                  acc, n);
    return;
  }
  __m256d v = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 2 <= n; t += 2) {
    const __m256d w = _mm256_loadu_pd(a + 2 * t);
    const __m256d x = _mm256_loadu_pd(b + 2 * t);
    const __m256d xs = flip(_mm256_permute_pd(x, 0b0101), kSwapSign);
    v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_permute_pd(w, 0b0000), x));
    v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_permute_pd(w, 0b1111), xs));
  }
  acc[0] += v[0] + v[2];
  acc[1] += v[1] + v[3];
  for (; t < n; ++t) {
    const double* w = a + 2 * t;
    const double* x = b + 2 * t;
    acc[0] += w[0] * x[0] - w[1] * x[1];
    acc[1] += w[0] * x[1] + w[1] * x[0];
  }
}

void complex_axpy(int dim, const double* a, const double* b,
                  std::ptrdiff_t b_stride, double* acc,
                  std::ptrdiff_t acc_stride, std::size_t n) {
  if (b_stride != 2 || acc_stride != 2) {
    scalar_kernels(AlgebraTag::kComplex).axpy(dim, a, b, b_stride, acc,
                                              acc_stride, n);
    return;
  }
  const __m256d wr = _mm256_set1_pd(a[0]);
  const __m256d wi = _mm256_set1_pd(a[1]);
  std::size_t t = 0;
  for (; t + 2 <= n; t += 2) {
    const __m256d x = _mm256_loadu_pd(b + 2 * t);
    const __m256d xs = flip(_mm256_permute_pd(x, 0b0101), kSwapSign);
    __m256d v = _mm256_loadu_pd(acc + 2 * t);
    v = _mm256_add_pd(v, _mm256_mul_pd(wr, x));
    v = _mm256_add_pd(v, _mm256_mul_pd(wi, xs));
    _mm256_storeu_pd(acc + 2 * t, v);
  }
  for (; t < n; ++t) {
    const double* x = b + 2 * t;
    acc[2 * t + 0] += a[0] * x[0] - a[1] * x[1];
    acc[2 * t + 1] += a[0] * x[1] + a[1] * x[0];
  }
}

void dual_contract(int dim, const double* a, std::ptrdiff_t a_stride,
                   const double* b, std::ptrdiff_t b_stride, double* acc,
                   std::size_t n) {
  if (a_stride != 2 || b_stride != 2) {
    scalar_kernels(AlgebraTag::kDual).contract(dim, a, a_stride, b, b_stride,
                                               acc, n);
    return;
  }
  const __m256d zero = _mm256_setzero_pd();
  __m256d v = zero;
  std::size_t t = 0;
  for (; t + 2 <= n; t += 2) {
    const __m256d w = _mm256_loadu_pd(a + 2 * t);
    const __m256d x = _mm256_loadu_pd(b + 2 * t);
    v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_permute_pd(w, 0b0000), x));
    // w_b * x_a lands on the b component only.
    const __m256d cross =
        _mm256_mul_pd(_mm256_permute_pd(w, 0b1111), _mm256_permute_pd(x, 0b0101));
    v = _mm256_add_pd(v, _mm256_blend_pd(zero, cross, 0b1010));
  }
  acc[0] += v[0] + v[2];
  acc[1] += v[1] + v[3];
  for (; t < n; ++t) {
    const double* w = a + 2 * t;
    const double* x = b + 2 * t;
    acc[0] += w[0] * x[0];
    acc[1] += w[0] * x[1] + w[1] * x[0];
  }
}

// ---- m4r: four rows of four -----------------------------------------------

inline void m4r_rows_accum(__m256d v[4], const double* w, const __m256d x[4]) {
  for (int r = 0; r < 4; ++r)
    for (int t = 0; t < 4; ++t)
      v[r] = _mm256_add_pd(v[r], _mm256_mul_pd(_mm256_broadcast_sd(w + 4 * r + t), x[t]));
}

void m4r_product(int, const double* x, const double* y, double* out) {
  __m256d v[4] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                  _mm256_setzero_pd(), _mm256_setzero_pd()};
  __m256d rows[4];
  for (int r = 0; r < 4; ++r) rows[r] = _mm256_loadu_pd(y + 4 * r);
  m4r_rows_accum(v, x, rows);
  for (int r = 0; r < 4; ++r) _mm256_storeu_pd(out + 4 * r, v[r]);
}

void m4r_contract(int, const double* a, std::ptrdiff_t a_stride,
                  const double* b, std::ptrdiff_t b_stride, double* acc,
                  std::size_t n) {
  __m256d v[4];
  for (int r = 0; r < 4; ++r) v[r] = _mm256_loadu_pd(acc + 4 * r);
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = b + t * b_stride;
    __m256d rows[4];
    for (int r = 0; r < 4; ++r) rows[r] = _mm256_loadu_pd(x + 4 * r);
    m4r_rows_accum(v, a + t * a_stride, rows);
  }
  for (int r = 0; r < 4; ++r) _mm256_storeu_pd(acc + 4 * r, v[r]);
}

void m4r_axpy(int, const double* a, const double* b, std::ptrdiff_t b_stride,
              double* acc, std::ptrdiff_t acc_stride, std::size_t n) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = b + t * b_stride;
    double* o = acc + t * acc_stride;
    __m256d v[4];
    __m256d rows[4];
    for (int r = 0; r < 4; ++r) {
      v[r] = _mm256_loadu_pd(o + 4 * r);
      rows[r] = _mm256_loadu_pd(x + 4 * r);
    }
    m4r_rows_accum(v, a, rows);
    for (int r = 0; r < 4; ++r) _mm256_storeu_pd(o + 4 * r, v[r]);
  }
}

// ---- m2c: rows of two complex ---------------------------------------------

inline __m256d cmul_accum(__m256d acc, double wr, double wi, __m256d x) {
  const __m256d xs = flip(_mm256_permute_pd(x, 0b0101), kSwapSign);
  acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wr), x));
  return _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wi), xs));
}

inline void m2c_rows_accum(__m256d v[2], const double* w, __m256d row0,
                           __m256d row1) {
  v[0] = cmul_accum(v[0], w[0], w[1], row0);
  v[0] = cmul_accum(v[0], w[2], w[3], row1);
  v[1] = cmul_accum(v[1], w[4], w[5], row0);
  v[1] = cmul_accum(v[1], w[6], w[7], row1);
}

void m2c_product(int, const double* x, const double* y, double* out) {
  __m256d v[2] = {_mm256_setzero_pd(), _mm256_setzero_pd()};
  m2c_rows_accum(v, x, _mm256_loadu_pd(y), _mm256_loadu_pd(y + 4));
  _mm256_storeu_pd(out, v[0]);
  _mm256_storeu_pd(out + 4, v[1]);
}

void m2c_contract(int, const double* a, std::ptrdiff_t a_stride,
                  const double* b, std::ptrdiff_t b_stride, double* acc,
                  std::size_t n) {
  __m256d v[2] = {_mm256_loadu_pd(acc), _mm256_loadu_pd(acc + 4)};
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = b + t * b_stride;
    m2c_rows_accum(v, a + t * a_stride, _mm256_loadu_pd(x),
                   _mm256_loadu_pd(x + 4));
  }
  _mm256_storeu_pd(acc, v[0]);
  _mm256_storeu_pd(acc + 4, v[1]);
}

void m2c_axpy(int, const double* a, const double* b, std::ptrdiff_t b_stride,
              double* acc, std::ptrdiff_t acc_stride, std::size_t n) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = b + t * b_stride;
    double* o = acc + t * acc_stride;
    __m256d v[2] = {_mm256_loadu_pd(o), _mm256_loadu_pd(o + 4)};
    m2c_rows_accum(v, a, _mm256_loadu_pd(x), _mm256_loadu_pd(x + 4));
    _mm256_storeu_pd(o, v[0]);
    _mm256_storeu_pd(o + 4, v[1]);
  }
}

// ---- real / diagonal: plain componentwise loops ---------------------------

void real_contract(int dim, const double* a, std::ptrdiff_t a_stride,
                   const double* b, std::ptrdiff_t b_stride, double* acc,
                   std::size_t n) {
  if (a_stride != 1 || b_stride != 1) {
    scalar_kernels(AlgebraTag::kReal).contract(dim, a, a_stride, b, b_stride,
                                               acc, n);
    return;
  }
  __m256d v = _mm256_setzero_pd();
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4)
    v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(a + t), _mm256_loadu_pd(b + t)));
  acc[0] += (v[0] + v[1]) + (v[2] + v[3]);
  for (; t < n; ++t) acc[0] += a[t] * b[t];
}

void real_axpy(int dim, const double* a, const double* b,
               std::ptrdiff_t b_stride, double* acc, std::ptrdiff_t acc_stride,
               std::size_t n) {
  if (b_stride != 1 || acc_stride != 1) {
    scalar_kernels(AlgebraTag::kReal).axpy(dim, a, b, b_stride, acc, acc_stride,
                                           n);
    return;
  }
  const __m256d w = _mm256_set1_pd(a[0]);
  std::size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d v = _mm256_loadu_pd(acc + t);
    v = _mm256_add_pd(v, _mm256_mul_pd(w, _mm256_loadu_pd(b + t)));
    _mm256_storeu_pd(acc + t, v);
  }
  for (; t < n; ++t) acc[t] += a[0] * b[t];
}

void diag_contract(int dim, const double* a, std::ptrdiff_t a_stride,
                   const double* b, std::ptrdiff_t b_stride, double* acc,
                   std::size_t n) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* w = a + t * a_stride;
    const double* x = b + t * b_stride;
    int i = 0;
    for (; i + 4 <= dim; i += 4) {
      __m256d v = _mm256_loadu_pd(acc + i);
      v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i)));
      _mm256_storeu_pd(acc + i, v);
    }
    for (; i < dim; ++i) acc[i] += w[i] * x[i];
  }
}

void diag_axpy(int dim, const double* a, const double* b,
               std::ptrdiff_t b_stride, double* acc, std::ptrdiff_t acc_stride,
               std::size_t n) {
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = b + t * b_stride;
    double* o = acc + t * acc_stride;
    int i = 0;
    for (; i + 4 <= dim; i += 4) {
      __m256d v = _mm256_loadu_pd(o + i);
      v = _mm256_add_pd(v, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(x + i)));
      _mm256_storeu_pd(o + i, v);
    }
    for (; i < dim; ++i) o[i] += a[i] * x[i];
  }
}

}  // namespace

const KernelSet* avx2_kernels(AlgebraTag tag) {
  static const KernelSet kM2R = {&m2r_product, &m2r_contract, &m2r_axpy};
  static const KernelSet kQuat = {&quat_product, &quat_contract, &quat_axpy};
  static const KernelSet kComplex = {nullptr, &complex_contract, &complex_axpy};
  static const KernelSet kDual = {nullptr, &dual_contract, nullptr};
  static const KernelSet kM4R = {&m4r_product, &m4r_contract, &m4r_axpy};
  static const KernelSet kM2C = {&m2c_product, &m2c_contract, &m2c_axpy};
  static const KernelSet kReal = {nullptr, &real_contract, &real_axpy};
  static const KernelSet kDiag = {nullptr, &diag_contract, &diag_axpy};
  switch (tag) {
    case AlgebraTag::kM2R: return &kM2R;
    case AlgebraTag::kQuaternion: return &kQuat;
    case AlgebraTag::kComplex: return &kComplex;
    case AlgebraTag::kDual: return &kDual;
    case AlgebraTag::kM4R: return &kM4R;
    case AlgebraTag::kM2C: return &kM2C;
    case AlgebraTag::kReal: return &kReal;
    case AlgebraTag::kDiagonal: return &kDiag;
    default: return nullptr;
  }
}

}  // namespace algnn::kernels::detail

#endif  // ALGNN_HAVE_AVX2
