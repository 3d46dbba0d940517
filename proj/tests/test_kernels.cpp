#include <doctest.h>

#include <vector>

#include "algnn/kernels.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace algnn;
using namespace algnn::test;

namespace {

std::vector<kernels::Isa> isas_under_test() {
  std::vector<kernels::Isa> isas = {kernels::Isa::kScalar};
  if (kernels::detect_isa() == kernels::Isa::kAvx2)
    isas.push_back(kernels::Isa::kAvx2);
  return isas;
}

struct IsaGuard {
  kernels::Isa saved = kernels::active_isa();
  ~IsaGuard() { kernels::set_isa(saved); }
};

}  // namespace

TEST_CASE("mul_fast worked examples") {
  CHECK(kernels::mul_fast(AlgebraId::m2r(), {1, 2, 3, 4}, {5, 6, 7, 8}) ==
        Tuple{19, 22, 43, 50});
  CHECK(kernels::mul_fast(AlgebraId::cross3(), {1, 0, 0}, {0, 1, 0}) ==
        Tuple{0, 0, 1});
  CHECK(kernels::mul_fast(AlgebraId::dual(), {2, 3}, {5, 7}) ==
        Tuple{10, 2 * 7 + 3 * 5});
  CHECK_THROWS_AS(kernels::mul_fast(AlgebraId::complex(), {1.0}, {1, 2}),
                  std::invalid_argument);
}

TEST_CASE("mul_fast matches mul_generic within 4 ulps on every isa") {
  IsaGuard guard;
  std::mt19937_64 rng(101);
  for (kernels::Isa isa : isas_under_test()) {
    kernels::set_isa(isa);
    for (const AlgebraId& alg : all_algebras(5)) {
      const StructureTable& table = structure_table(alg);
      for (int rep = 0; rep < 1000; ++rep) {
        const Tuple x = random_tuple(rng, alg.dim(), -3.0, 3.0);
        const Tuple y = random_tuple(rng, alg.dim(), -3.0, 3.0);
        const Tuple want = mul_generic(table, x, y);
        const Tuple got = kernels::mul_fast(alg, x, y);
        for (int i = 0; i < alg.dim(); ++i) {
          CAPTURE(alg.name());
          CHECK(ulp_distance(want[i], got[i]) <= 4);
        }
      }
    }
  }
}

TEST_CASE("contract matches a mul_generic accumulation loop") {
  IsaGuard guard;
  std::mt19937_64 rng(103);
  for (kernels::Isa isa : isas_under_test()) {
    kernels::set_isa(isa);
    for (const AlgebraId& alg : all_algebras(5)) {
      const StructureTable& table = structure_table(alg);
      const int dim = alg.dim();
      for (std::ptrdiff_t stride_extra : {0, 3}) {
        const std::ptrdiff_t stride = dim + stride_extra;
        const std::size_t n = 57;
        std::vector<double> a(n * stride), b(n * stride);
        for (double& v : a) v = uniform(rng, -2, 2);
        for (double& v : b) v = uniform(rng, -2, 2);
        Tuple want = random_tuple(rng, dim);
        Tuple got = want;
        for (std::size_t t = 0; t < n; ++t)
          mul_accum(table, a.data() + t * stride, b.data() + t * stride,
                    want.data());
        kernels::contract(alg, a.data(), stride, b.data(), stride, got.data(),
                          n);
        CAPTURE(alg.name());
        CAPTURE(stride);
        CHECK(max_rel_diff(want, got) < 1e-12);
      }
    }
  }
}

TEST_CASE("axpy matches a mul_generic accumulation loop") {
  IsaGuard guard;
  std::mt19937_64 rng(107);
  for (kernels::Isa isa : isas_under_test()) {
    kernels::set_isa(isa);
    for (const AlgebraId& alg : all_algebras(5)) {
      const StructureTable& table = structure_table(alg);
      const int dim = alg.dim();
      for (std::ptrdiff_t stride_extra : {0, 2}) {
        const std::ptrdiff_t stride = dim + stride_extra;
        const std::size_t n = 41;
        const Tuple w = random_tuple(rng, dim);
        std::vector<double> b(n * stride);
        for (double& v : b) v = uniform(rng, -2, 2);
        std::vector<double> want(n * stride), got;
        for (double& v : want) v = uniform(rng, -2, 2);
        got = want;
        for (std::size_t t = 0; t < n; ++t)
          mul_accum(table, w.data(), b.data() + t * stride,
                    want.data() + t * stride);
        kernels::axpy(alg, w.data(), b.data(), stride, got.data(), stride, n);
        CAPTURE(alg.name());
        CAPTURE(stride);
        CHECK(max_rel_diff(want, got) < 1e-12);
      }
    }
  }
}

TEST_CASE("scalar and simd paths agree") {
  if (kernels::detect_isa() != kernels::Isa::kAvx2) return;
  IsaGuard guard;
  std::mt19937_64 rng(109);
  for (const AlgebraId& alg : all_algebras()) {
    const int dim = alg.dim();
    const std::size_t n = 200;
    std::vector<double> a(n * dim), b(n * dim);
    for (double& v : a) v = uniform(rng, -2, 2);
    for (double& v : b) v = uniform(rng, -2, 2);
    Tuple acc_scalar(dim, 0.0), acc_simd(dim, 0.0);
    kernels::set_isa(kernels::Isa::kScalar);
    kernels::contract(alg, a.data(), dim, b.data(), dim, acc_scalar.data(), n);
    kernels::set_isa(kernels::Isa::kAvx2);
    kernels::contract(alg, a.data(), dim, b.data(), dim, acc_simd.data(), n);
    CAPTURE(alg.name());
    CHECK(max_rel_diff(acc_scalar, acc_simd) < 1e-12);
  }
}

TEST_CASE("kernel counters advance by table multiplies") {
  kernels::set_counting(true);
  kernels::reset_counters();
  const AlgebraId alg = AlgebraId::quaternion();
  const std::size_t n = 12;
  std::vector<double> a(n * 4, 0.5), b(n * 4, 0.25), acc(4, 0.0);
  kernels::contract(alg, a.data(), 4, b.data(), 4, acc.data(), n);
  Tuple x(4, 1.0), y(4, 2.0);
  kernels::mul_fast(alg, x, y);
  kernels::set_counting(false);
  CHECK(kernels::counters().tuple_products == n + 1);
  CHECK(kernels::counters().multiplies == (n + 1) * 16);

  // Disabled counters stay put.
  kernels::reset_counters();
  kernels::mul_fast(alg, x, y);
  CHECK(kernels::counters().tuple_products == 0);
}
