#include "algnn/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace algnn::kernels {
namespace {

constexpr int kTagCount = 10;

// Merged dispatch tables: AVX2 slots fall back to the scalar variant wherever
// no vector kernel exists.
struct DispatchTables {
  detail::KernelSet sets[2][kTagCount];

  DispatchTables() {
    for (int t = 0; t < kTagCount; ++t) {
      const auto tag = static_cast<AlgebraTag>(t);
      sets[0][t] = detail::scalar_kernels(tag);
      sets[1][t] = sets[0][t];
#ifdef ALGNN_HAVE_AVX2
      if (const detail::KernelSet* v = detail::avx2_kernels(tag)) {
        if (v->product) sets[1][t].product = v->product;
        if (v->contract) sets[1][t].contract = v->contract;
        if (v->axpy) sets[1][t].axpy = v->axpy;
      }
#endif
    }
  }
};

const DispatchTables& dispatch_tables() {
  static const DispatchTables tables;
  return tables;
}

Isa g_isa = [] {
  if (const char* env = std::getenv("ALGNN_ISA")) {
    std::string s(env);
    if (s == "scalar") return Isa::kScalar;
    if (s == "avx2") return Isa::kAvx2;
  }
  return detect_isa();
}();

struct CounterState {
  Counters counters;
  bool enabled = false;
};

thread_local CounterState g_counters;

inline const detail::KernelSet& resolve(AlgebraTag tag) {
  return dispatch_tables().sets[g_isa == Isa::kAvx2 ? 1 : 0][static_cast<int>(tag)];
}

inline void count(const AlgebraId& algebra, std::size_t products) {
  if (!g_counters.enabled) return;
  g_counters.counters.tuple_products += products;
  g_counters.counters.multiplies +=
      products * structure_table(algebra).entries.size();
}

}  // namespace

Isa detect_isa() {
#ifdef ALGNN_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return Isa::kAvx2;
#endif
  return Isa::kScalar;
}

Isa active_isa() { return g_isa; }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detect_isa() != Isa::kAvx2)
    throw std::invalid_argument("avx2 kernels unavailable on this cpu/build");
  g_isa = isa;
}

std::string isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

Counters& counters() { return g_counters.counters; }
void reset_counters() { g_counters.counters = Counters{}; }
void set_counting(bool enabled) { g_counters.enabled = enabled; }
bool counting_enabled() { return g_counters.enabled; }

void mul_fast(const AlgebraId& algebra, const double* x, const double* y,
              double* out) {
  count(algebra, 1);
  const detail::KernelSet& set = resolve(algebra.tag());
  if (set.product) {
    set.product(algebra.dim(), x, y, out);
  } else {
    const int dim = algebra.dim();
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
    set.contract(dim, x, dim, y, dim, out, 1);
  }
}

Tuple mul_fast(const AlgebraId& algebra, const Tuple& x, const Tuple& y) {
  const std::size_t dim = static_cast<std::size_t>(algebra.dim());
  if (x.size() != dim || y.size() != dim)
    throw std::invalid_argument("mul_fast: tuple length mismatch");
  Tuple out(dim);
  mul_fast(algebra, x.data(), y.data(), out.data());
  return out;
}

void contract(const AlgebraId& algebra, const double* a,
              std::ptrdiff_t a_stride, const double* b, std::ptrdiff_t b_stride,
              double* acc, std::size_t n) {
  count(algebra, n);
  resolve(algebra.tag()).contract(algebra.dim(), a, a_stride, b, b_stride, acc,
                                  n);
}

void axpy(const AlgebraId& algebra, const double* a, const double* b,
          std::ptrdiff_t b_stride, double* acc, std::ptrdiff_t acc_stride,
          std::size_t n) {
  count(algebra, n);
  resolve(algebra.tag()).axpy(algebra.dim(), a, b, b_stride, acc, acc_stride,
                              n);
}

}  // namespace algnn::kernels
