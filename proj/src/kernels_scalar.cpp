#include "algnn/kernels.hpp"

namespace algnn::kernels::detail {
namespace {

// Each algebra gets a literal product-accumulate body; contract/axpy wrap it
// in strided loops. Evaluation order inside a product follows the structure
// table's row order so results track mul_generic closely.

struct RealOps {
  static constexpr int kDim = 1;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0];
  }
};

struct ComplexOps {
  static constexpr int kDim = 2;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0] - x[1] * y[1];
    o[1] += x[0] * y[1] + x[1] * y[0];
  }
};

struct DualOps {
  static constexpr int kDim = 2;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0];
    o[1] += x[0] * y[1] + x[1] * y[0];
  }
};

struct Cross3Ops {
  static constexpr int kDim = 3;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[1] * y[2] - x[2] * y[1];
    o[1] += x[2] * y[0] - x[0] * y[2];
    o[2] += x[0] * y[1] - x[1] * y[0];
  }
};

struct QuaternionOps {
  static constexpr int kDim = 4;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0] - x[1] * y[1] - x[2] * y[2] - x[3] * y[3];
    o[1] += x[0] * y[1] + x[1] * y[0] + x[2] * y[3] - x[3] * y[2];
    o[2] += x[0] * y[2] - x[1] * y[3] + x[2] * y[0] + x[3] * y[1];
    o[3] += x[0] * y[3] + x[1] * y[2] - x[2] * y[1] + x[3] * y[0];
  }
};

struct M2ROps {
  static constexpr int kDim = 4;
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0] + x[1] * y[2];
    o[1] += x[0] * y[1] + x[1] * y[3];
    o[2] += x[2] * y[0] + x[3] * y[2];
    o[3] += x[2] * y[1] + x[3] * y[3];
  }
};

template <int N>
struct MatOps {
  static constexpr int kDim = N * N;
  static inline void accum(int, const double* x, const double* y, double* o) {
    for (int r = 0; r < N; ++r)
      for (int t = 0; t < N; ++t) {
        const double w = x[r * N + t];
        for (int c = 0; c < N; ++c) o[r * N + c] += w * y[t * N + c];
      }
  }
};

struct M2COps {
  static constexpr int kDim = 8;
  // (a,b,c,d,e,f,g,h) = [[a+bi, c+di], [e+fi, g+hi]], rows of 2 complex each.
  static inline void accum(int, const double* x, const double* y, double* o) {
    o[0] += x[0] * y[0] - x[1] * y[1] + x[2] * y[4] - x[3] * y[5];
    o[1] += x[0] * y[1] + x[1] * y[0] + x[2] * y[5] + x[3] * y[4];
    o[2] += x[0] * y[2] - x[1] * y[3] + x[2] * y[6] - x[3] * y[7];
    o[3] += x[0] * y[3] + x[1] * y[2] + x[2] * y[7] + x[3] * y[6];
    o[4] += x[4] * y[0] - x[5] * y[1] + x[6] * y[4] - x[7] * y[5];
    o[5] += x[4] * y[1] + x[5] * y[0] + x[6] * y[5] + x[7] * y[4];
    o[6] += x[4] * y[2] - x[5] * y[3] + x[6] * y[6] - x[7] * y[7];
    o[7] += x[4] * y[3] + x[5] * y[2] + x[6] * y[7] + x[7] * y[6];
  }
};

struct DiagonalOps {
  static constexpr int kDim = 0;  // runtime
  static inline void accum(int dim, const double* x, const double* y,
                           double* o) {
    for (int i = 0; i < dim; ++i) o[i] += x[i] * y[i];
  }
};

template <class Ops>
void product_impl(int dim, const double* x, const double* y, double* out) {
  const int d = Ops::kDim ? Ops::kDim : dim;
  for (int i = 0; i < d; ++i) out[i] = 0.0;
  Ops::accum(d, x, y, out);
}

template <class Ops>
void contract_impl(int dim, const double* a, std::ptrdiff_t a_stride,
                   const double* b, std::ptrdiff_t b_stride, double* acc,
                   std::size_t n) {
  const int d = Ops::kDim ? Ops::kDim : dim;
  for (std::size_t t = 0; t < n; ++t)
    Ops::accum(d, a + t * a_stride, b + t * b_stride, acc);
}

template <class Ops>
void axpy_impl(int dim, const double* a, const double* b,
               std::ptrdiff_t b_stride, double* acc, std::ptrdiff_t acc_stride,
               std::size_t n) {
  const int d = Ops::kDim ? Ops::kDim : dim;
  for (std::size_t t = 0; t < n; ++t)
    Ops::accum(d, a, b + t * b_stride, acc + t * acc_stride);
}

template <class Ops>
constexpr KernelSet make_set() {
  return {&product_impl<Ops>, &contract_impl<Ops>, &axpy_impl<Ops>};
}

}  // namespace

const KernelSet& scalar_kernels(AlgebraTag tag) {
  static const KernelSet kReal = make_set<RealOps>();
  static const KernelSet kComplex = make_set<ComplexOps>();
  static const KernelSet kQuat = make_set<QuaternionOps>();
  static const KernelSet kM2R = make_set<M2ROps>();
  static const KernelSet kM3R = make_set<MatOps<3>>();
  static const KernelSet kM4R = make_set<MatOps<4>>();
  static const KernelSet kM2C = make_set<M2COps>();
  static const KernelSet kDual = make_set<DualOps>();
  static const KernelSet kCross = make_set<Cross3Ops>();
  static const KernelSet kDiag = make_set<DiagonalOps>();
  switch (tag) {
    case AlgebraTag::kReal: return kReal;
    case AlgebraTag::kComplex: return kComplex;
    case AlgebraTag::kQuaternion: return kQuat;
    case AlgebraTag::kM2R: return kM2R;
    case AlgebraTag::kM3R: return kM3R;
    case AlgebraTag::kM4R: return kM4R;
    case AlgebraTag::kM2C: return kM2C;
    case AlgebraTag::kDual: return kDual;
    case AlgebraTag::kCross3: return kCross;
    case AlgebraTag::kDiagonal: return kDiag;
  }
  return kReal;
}

}  // namespace algnn::kernels::detail
