#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "algnn/algebra.hpp"
#include "algnn/tuple_ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace algnn;
using namespace algnn::test;

namespace {

Tuple mul(const AlgebraId& a, const Tuple& x, const Tuple& y) {
  return mul_generic(structure_table(a), x, y);
}

double dot(const Tuple& a, const Tuple& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("tuple dims match the weight-size column") {
  CHECK(AlgebraId::real().dim() == 1);
  CHECK(AlgebraId::complex().dim() == 2);
  CHECK(AlgebraId::m2r().dim() == 4);
  CHECK(AlgebraId::m3r().dim() == 9);
  CHECK(AlgebraId::m4r().dim() == 16);
  CHECK(AlgebraId::m2c().dim() == 8);
  CHECK(AlgebraId::quaternion().dim() == 4);
  CHECK(AlgebraId::dual().dim() == 2);
  CHECK(AlgebraId::cross3().dim() == 3);
  CHECK(AlgebraId::diagonal(7).dim() == 7);
  CHECK_THROWS_AS(AlgebraId::diagonal(0), std::invalid_argument);
}

TEST_CASE("algebra names round-trip") {
  for (const AlgebraId& a : all_algebras(6)) {
    CHECK(AlgebraId::parse(a.name()) == a);
  }
  CHECK(AlgebraId::parse("H") == AlgebraId::quaternion());
  CHECK(AlgebraId::parse("diagonal") == AlgebraId::diagonal(4));
  CHECK_THROWS(AlgebraId::parse("octonion"));
}

TEST_CASE("complex table entries are exact") {
  const StructureTable& t = structure_table(AlgebraId::complex());
  REQUIRE(t.dim == 2);
  REQUIRE(t.entries.size() == 4);
  const std::set<std::tuple<int, int, int, int>> got(
      [&] {
        std::set<std::tuple<int, int, int, int>> s;
        for (const auto& e : t.entries) s.insert({e.i, e.j, e.k, e.sign});
        return s;
      }());
  const std::set<std::tuple<int, int, int, int>> want = {
      {0, 0, 0, 1}, {0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, -1}};
  CHECK(got == want);
}

TEST_CASE("dual table drops the (1,1) product") {
  const StructureTable& t = structure_table(AlgebraId::dual());
  REQUIRE(t.entries.size() == 3);
  for (const auto& e : t.entries) CHECK(!(e.i == 1 && e.j == 1));
}

TEST_CASE("cross3 table has six signed entries and no diagonal terms") {
  const StructureTable& t = structure_table(AlgebraId::cross3());
  REQUIRE(t.entries.size() == 6);
  int negatives = 0;
  for (const auto& e : t.entries) {
    CHECK(e.i != e.j);
    if (e.sign < 0) ++negatives;
  }
  CHECK(negatives == 3);
}

TEST_CASE("structure table entry counts match per-product multiplies") {
  const std::vector<std::pair<AlgebraId, std::size_t>> want = {
      {AlgebraId::real(), 1},    {AlgebraId::complex(), 4},
      {AlgebraId::m2r(), 8},     {AlgebraId::m3r(), 27},
      {AlgebraId::m4r(), 64},    {AlgebraId::m2c(), 32},
      {AlgebraId::quaternion(), 16}, {AlgebraId::dual(), 3},
      {AlgebraId::cross3(), 6},  {AlgebraId::diagonal(4), 4},
      {AlgebraId::diagonal(9), 9}};
  for (const auto& [a, n] : want) CHECK(structure_table(a).entries.size() == n);
}

TEST_CASE("table validation rejects malformed tables") {
  StructureTable bad;
  bad.dim = 2;
  bad.entries = {{0, 0, 0, 1}, {0, 0, 0, -1}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.entries = {{0, 0, 2, 1}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.entries = {{0, 0, 0, 2}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mul_generic worked examples") {
  CHECK(mul(AlgebraId::complex(), {0, 1}, {0, 1}) == Tuple{-1, 0});
  // i * j = k, cross-checked through the regular representation.
  const Tuple i = {0, 1, 0, 0}, j = {0, 0, 1, 0};
  CHECK(mul(AlgebraId::quaternion(), i, j) == Tuple{0, 0, 0, 1});
  const auto L = left_mul_matrix(structure_table(AlgebraId::quaternion()), i);
  Tuple via_rep(4, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) via_rep[r] += L[r * 4 + c] * j[c];
  CHECK(via_rep == Tuple{0, 0, 0, 1});

  const Tuple id = {1, 0, 0, 1}, v = {5, -2, 3.5, 7};
  CHECK(mul(AlgebraId::m2r(), id, v) == v);
}

TEST_CASE("mul_generic rejects length mismatches") {
  CHECK_THROWS_AS(mul(AlgebraId::complex(), {1, 2, 3}, {0, 1}),
                  std::invalid_argument);
}

TEST_CASE("add and scale") {
  CHECK(add({1, 2}, {3, 4}) == Tuple{4, 6});
  CHECK(scale(2.0, {1, -1, 0, 3}) == Tuple{2, -2, 0, 6});
  const Tuple x = {0.5, -3.25, 7};
  CHECK(add(x, scale(-1.0, x)) == Tuple{0, 0, 0});
  CHECK_THROWS_AS(add({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("tuple_norm") {
  CHECK(tuple_norm(Tuple{3, 4}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(tuple_norm(Tuple{0, 0, 0, 0}) == 0.0);
  const Tuple m = {1, 2, 3, 4};
  const auto spec = spectrum_2x2(m);
  const double frob =
      std::sqrt(spec.sv[0] * spec.sv[0] + spec.sv[1] * spec.sv[1]);
  CHECK(tuple_norm(m) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-14));
  CHECK(frob == doctest::Approx(tuple_norm(m)).epsilon(1e-12));
}

TEST_CASE("identities") {
  CHECK(identity(AlgebraId::complex()) == Tuple{1, 0});
  CHECK(identity(AlgebraId::quaternion()) == Tuple{1, 0, 0, 0});
  CHECK(identity(AlgebraId::m2c()) == Tuple{1, 0, 0, 0, 0, 0, 1, 0});
  CHECK_THROWS_AS(identity(AlgebraId::cross3()), std::invalid_argument);

  std::mt19937_64 rng(7);
  for (const AlgebraId& a : all_algebras()) {
    if (!a.unital()) continue;
    const Tuple e = identity(a);
    const Tuple x = random_tuple(rng, a.dim());
    CHECK(max_abs_diff(mul(a, e, x), x) == 0.0);
    CHECK(max_abs_diff(mul(a, x, e), x) == 0.0);
  }
}

TEST_CASE("left_mul_matrix worked examples") {
  const double a = 1.5, b = -2.25;
  const Tuple ab = {a, b};
  const auto L = left_mul_matrix(structure_table(AlgebraId::complex()), ab);
  CHECK(L == std::vector<double>{a, -b, b, a});

  std::mt19937_64 rng(11);
  const Tuple x = random_tuple(rng, 3);
  const auto S = left_mul_matrix(structure_table(AlgebraId::cross3()), x);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) CHECK(S[r * 3 + c] == -S[c * 3 + r]);

  for (const AlgebraId& alg : all_algebras()) {
    if (!alg.unital()) continue;
    const auto I =
        left_mul_matrix(structure_table(alg), identity(alg));
    for (int r = 0; r < alg.dim(); ++r)
      for (int c = 0; c < alg.dim(); ++c)
        CHECK(I[r * alg.dim() + c] == (r == c ? 1.0 : 0.0));
  }
}

TEST_CASE("left_mul_matrix agrees with mul on random pairs") {
  std::mt19937_64 rng(13);
  for (const AlgebraId& a : all_algebras()) {
    const StructureTable& t = structure_table(a);
    for (int rep = 0; rep < 20; ++rep) {
      const Tuple x = random_tuple(rng, a.dim());
      const Tuple y = random_tuple(rng, a.dim());
      const auto L = left_mul_matrix(t, x);
      Tuple via(a.dim(), 0.0);
      for (int r = 0; r < a.dim(); ++r)
        for (int c = 0; c < a.dim(); ++c) via[r] += L[r * a.dim() + c] * y[c];
      CHECK(max_rel_diff(via, mul(a, x, y)) < 1e-12);
    }
  }
}

TEST_CASE("spectrum_2x2 worked examples") {
  auto s = spectrum_2x2(Tuple{2, 0, 0, 3});
  CHECK(s.eig_mag[0] == doctest::Approx(3).epsilon(1e-14));
  CHECK(s.eig_mag[1] == doctest::Approx(2).epsilon(1e-14));
  CHECK(s.sv[0] == doctest::Approx(3).epsilon(1e-14));
  CHECK(s.sv[1] == doctest::Approx(2).epsilon(1e-14));
  CHECK(s.det == 6.0);

  // Rotation by 90 degrees: eigenvalues +-i.
  s = spectrum_2x2(Tuple{0, 1, -1, 0});
  CHECK(s.eig_mag[0] == doctest::Approx(1).epsilon(1e-14));
  CHECK(s.eig_mag[1] == doctest::Approx(1).epsilon(1e-14));
  CHECK(s.sv[0] == doctest::Approx(1).epsilon(1e-14));
  CHECK(s.sv[1] == doctest::Approx(1).epsilon(1e-14));
  CHECK(s.det == 1.0);

  s = spectrum_2x2(Tuple{1, 2, 3, 4});
  CHECK(s.sv[0] * s.sv[0] + s.sv[1] * s.sv[1] ==
        doctest::Approx(30.0).epsilon(1e-12));
  CHECK(s.det == doctest::Approx(-2.0));
}

TEST_CASE("spectrum invariants on random matrices") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 500; ++rep) {
    const Tuple m = random_tuple(rng, 4, -2.0, 2.0);
    const auto s = spectrum_2x2(m);
    CHECK(s.sv[0] >= s.sv[1]);
    CHECK(s.sv[1] >= 0.0);
    CHECK(s.eig_mag[0] >= s.eig_mag[1]);
    const double norm2 = dot(m, m);
    CHECK(std::abs(s.sv[0] * s.sv[0] + s.sv[1] * s.sv[1] - norm2) <=
          1e-12 * std::max(1.0, norm2));
    CHECK(s.det == m[0] * m[3] - m[1] * m[2]);
    CHECK(s.sv[0] * s.sv[1] ==
          doctest::Approx(std::abs(s.det)).epsilon(1e-9));
  }
}

TEST_CASE("bilinearity") {
  std::mt19937_64 rng(19);
  for (const AlgebraId& alg : all_algebras()) {
    for (int rep = 0; rep < 100; ++rep) {
      const Tuple x = random_tuple(rng, alg.dim());
      const Tuple y = random_tuple(rng, alg.dim());
      const Tuple z = random_tuple(rng, alg.dim());
      const double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2);
      const Tuple lhs = mul(alg, x, add(scale(a, y), scale(b, z)));
      const Tuple rhs =
          add(scale(a, mul(alg, x, y)), scale(b, mul(alg, x, z)));
      CHECK(max_rel_diff(lhs, rhs) < 1e-12);
      const Tuple lhs2 = mul(alg, add(scale(a, y), scale(b, z)), x);
      const Tuple rhs2 =
          add(scale(a, mul(alg, y, x)), scale(b, mul(alg, z, x)));
      CHECK(max_rel_diff(lhs2, rhs2) < 1e-12);
    }
  }
}

TEST_CASE("associativity for associative algebras") {
  std::mt19937_64 rng(23);
  for (const AlgebraId& alg : all_algebras()) {
    if (!alg.associative()) continue;
    for (int rep = 0; rep < 200; ++rep) {
      const Tuple x = random_tuple(rng, alg.dim());
      const Tuple y = random_tuple(rng, alg.dim());
      const Tuple z = random_tuple(rng, alg.dim());
      CHECK(max_rel_diff(mul(alg, mul(alg, x, y), z),
                         mul(alg, x, mul(alg, y, z))) < 1e-10);
    }
  }
}

TEST_CASE("cross3 anticommutativity and Jacobi identity") {
  std::mt19937_64 rng(29);
  const AlgebraId c3 = AlgebraId::cross3();
  for (int rep = 0; rep < 200; ++rep) {
    const Tuple x = random_tuple(rng, 3);
    const Tuple y = random_tuple(rng, 3);
    const Tuple z = random_tuple(rng, 3);
    CHECK(max_rel_diff(mul(c3, x, y), scale(-1.0, mul(c3, y, x))) < 1e-12);
    const Tuple jac = add(add(mul(c3, x, mul(c3, y, z)),
                              mul(c3, y, mul(c3, z, x))),
                          mul(c3, z, mul(c3, x, y)));
    CHECK(tuple_norm(jac) < 1e-12);
  }
}

TEST_CASE("dual nilpotency is exact") {
  CHECK(mul(AlgebraId::dual(), {0, 1}, {0, 1}) == Tuple{0, 0});
}

TEST_CASE("products match the per-algebra oracles") {
  std::mt19937_64 rng(31);
  for (const AlgebraId& alg : all_algebras()) {
    for (int rep = 0; rep < 200; ++rep) {
      const Tuple x = random_tuple(rng, alg.dim());
      const Tuple y = random_tuple(rng, alg.dim());
      CHECK(max_rel_diff(mul(alg, x, y), product_oracle(alg, x, y)) < 1e-13);
    }
  }
}

TEST_CASE("left multiplication is a homomorphism for associative algebras") {
  std::mt19937_64 rng(37);
  for (const AlgebraId& alg : all_algebras()) {
    if (!alg.associative()) continue;
    const StructureTable& t = structure_table(alg);
    const int d = alg.dim();
    for (int rep = 0; rep < 25; ++rep) {
      const Tuple x = random_tuple(rng, d);
      const Tuple y = random_tuple(rng, d);
      const auto lx = left_mul_matrix(t, x);
      const auto ly = left_mul_matrix(t, y);
      const auto lxy = left_mul_matrix(t, mul(alg, x, y));
      std::vector<double> prod(d * d, 0.0);
      for (int r = 0; r < d; ++r)
        for (int k = 0; k < d; ++k)
          for (int c = 0; c < d; ++c)
            prod[r * d + c] += lx[r * d + k] * ly[k * d + c];
      CHECK(max_rel_diff(prod, lxy) < 1e-10);
    }
  }
}

TEST_CASE("adjoint tables implement the product pullbacks") {
  // <g, x*y> = <adjoint_right(x, g), y> = <adjoint_left(y, g), x>.
  std::mt19937_64 rng(41);
  for (const AlgebraId& alg : all_algebras()) {
    const StructureTable& fwd = structure_table(alg);
    const StructureTable right = adjoint_right_table(fwd);
    const StructureTable left = adjoint_left_table(fwd);
    for (int rep = 0; rep < 50; ++rep) {
      const Tuple x = random_tuple(rng, alg.dim());
      const Tuple y = random_tuple(rng, alg.dim());
      const Tuple g = random_tuple(rng, alg.dim());
      const double want = dot(g, mul(alg, x, y));
      CHECK(dot(mul_generic(right, x, g), y) ==
            doctest::Approx(want).epsilon(1e-12));
      CHECK(dot(mul_generic(left, y, g), x) ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("table dump format") {
  std::ostringstream out;
  dump_table(structure_table(AlgebraId::complex()), out);
  CHECK(out.str() == "0 0 0 +1\n0 1 1 +1\n1 0 1 +1\n1 1 0 -1\n");
}
