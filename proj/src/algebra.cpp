#include "algnn/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <ostream>
#include <set>

namespace algnn {
namespace {

// Interaction tables in the row/column form used for tuple products: row =
// left-operand component, column = right-operand component, cell = output
// component letter ('.' none, lowercase adds, uppercase subtracts).
constexpr const char* kRealRows[] = {"a"};

constexpr const char* kComplexRows[] = {
    "ab",
    "bA",
};

constexpr const char* kM2RRows[] = {
    "ab..",
    "..ab",
    "cd..",
    "..cd",
};

constexpr const char* kQuaternionRows[] = {
    "abcd",
    "bAdC",
    "cDAb",
    "dcBA",
};

constexpr const char* kM2CRows[] = {
    "abcd....",
    "bAdC....",
    "....abcd",
    "....bAdC",
    "efgh....",
    "fEhG....",
    "....efgh",
    "....fEhG",
};

constexpr const char* kDualRows[] = {
    "ab",
    "b.",
};

constexpr const char* kCross3Rows[] = {
    ".cB",
    "C.a",
    "bA.",
};

StructureTable from_rows(int dim, const char* const* rows) {
  StructureTable table;
  table.dim = dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const char cell = rows[i][j];
      if (cell == '.') continue;
      TableEntry e;
      e.i = static_cast<std::uint16_t>(i);
      e.j = static_cast<std::uint16_t>(j);
      if (std::islower(static_cast<unsigned char>(cell))) {
        e.k = static_cast<std::uint16_t>(cell - 'a');
        e.sign = 1;
      } else {
        e.k = static_cast<std::uint16_t>(cell - 'A');
        e.sign = -1;
      }
      table.entries.push_back(e);
    }
  }
  table.validate();
  return table;
}

// Row-major n x n matrix product: out[r,c] += x[r,t] * y[t,c].
StructureTable matrix_table(int n) {
  StructureTable table;
  table.dim = n * n;
  for (int r = 0; r < n; ++r)
    for (int t = 0; t < n; ++t)
      for (int c = 0; c < n; ++c)
        table.entries.push_back({static_cast<std::uint16_t>(r * n + t),
                                 static_cast<std::uint16_t>(t * n + c),
                                 static_cast<std::uint16_t>(r * n + c), 1});
  table.validate();
  return table;
}

StructureTable diagonal_table(int n) {
  StructureTable table;
  table.dim = n;
  for (int i = 0; i < n; ++i)
    table.entries.push_back({static_cast<std::uint16_t>(i),
                             static_cast<std::uint16_t>(i),
                             static_cast<std::uint16_t>(i), 1});
  table.validate();
  return table;
}

}  // namespace

void StructureTable::validate() const {
  std::set<std::tuple<int, int, int>> seen;
  for (const TableEntry& e : entries) {
    if (e.i >= dim || e.j >= dim || e.k >= dim)
      throw std::invalid_argument("structure table index out of range");
    if (e.sign != 1 && e.sign != -1)
      throw std::invalid_argument("structure table sign must be +/-1");
    if (!seen.insert({e.i, e.j, e.k}).second)
      throw std::invalid_argument("duplicate structure table entry");
  }
}

const StructureTable& structure_table(const AlgebraId& algebra) {
  switch (algebra.tag()) {
    case AlgebraTag::kReal: {
      static const StructureTable t = from_rows(1, kRealRows);
      return t;
    }
    case AlgebraTag::kComplex: {
      static const StructureTable t = from_rows(2, kComplexRows);
      return t;
    }
    case AlgebraTag::kQuaternion: {
      static const StructureTable t = from_rows(4, kQuaternionRows);
      return t;
    }
    case AlgebraTag::kM2R: {
      static const StructureTable t = from_rows(4, kM2RRows);
      return t;
    }
    case AlgebraTag::kM3R: {
      static const StructureTable t = matrix_table(3);
      return t;
    }
    case AlgebraTag::kM4R: {
      static const StructureTable t = matrix_table(4);
      return t;
    }
    case AlgebraTag::kM2C: {
      static const StructureTable t = from_rows(8, kM2CRows);
      return t;
    }
    case AlgebraTag::kDual: {
      static const StructureTable t = from_rows(2, kDualRows);
      return t;
    }
    case AlgebraTag::kCross3: {
      static const StructureTable t = from_rows(3, kCross3Rows);
      return t;
    }
    case AlgebraTag::kDiagonal: {
      static std::mutex mu;
      static std::map<int, StructureTable> cache;
      std::lock_guard<std::mutex> lock(mu);
      auto [it, inserted] = cache.try_emplace(algebra.dim());
      if (inserted) it->second = diagonal_table(algebra.dim());
      return it->second;
    }
  }
  throw std::invalid_argument("unknown algebra tag");
}

void dump_table(const StructureTable& table, std::ostream& out) {
  for (const TableEntry& e : table.entries)
    out << e.i << ' ' << e.j << ' ' << e.k << ' '
        << (e.sign > 0 ? "+1" : "-1") << '\n';
}

StructureTable adjoint_right_table(const StructureTable& forward) {
  StructureTable table;
  table.dim = forward.dim;
  for (const TableEntry& e : forward.entries)
    table.entries.push_back({e.i, e.k, e.j, e.sign});
  table.validate();
  return table;
}

StructureTable adjoint_left_table(const StructureTable& forward) {
  StructureTable table;
  table.dim = forward.dim;
  for (const TableEntry& e : forward.entries)
    table.entries.push_back({e.j, e.k, e.i, e.sign});
  table.validate();
  return table;
}

namespace {

const StructureTable& cached_adjoint(const AlgebraId& algebra, bool right) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, bool>, StructureTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = cache.try_emplace(
      {static_cast<int>(algebra.tag()), algebra.dim(), right});
  if (inserted)
    it->second = right ? adjoint_right_table(structure_table(algebra))
                       : adjoint_left_table(structure_table(algebra));
  return it->second;
}

}  // namespace

const StructureTable& adjoint_right_table(const AlgebraId& algebra) {
  return cached_adjoint(algebra, true);
}

const StructureTable& adjoint_left_table(const AlgebraId& algebra) {
  return cached_adjoint(algebra, false);
}

std::string AlgebraId::name() const {
  switch (tag_) {
    case AlgebraTag::kReal: return "real";
    case AlgebraTag::kComplex: return "complex";
    case AlgebraTag::kQuaternion: return "quaternion";
    case AlgebraTag::kM2R: return "m2r";
    case AlgebraTag::kM3R: return "m3r";
    case AlgebraTag::kM4R: return "m4r";
    case AlgebraTag::kM2C: return "m2c";
    case AlgebraTag::kDual: return "dual";
    case AlgebraTag::kCross3: return "cross3";
    case AlgebraTag::kDiagonal: return "diag" + std::to_string(n_);
  }
  return "?";
}

AlgebraId AlgebraId::parse(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "real" || s == "r") return real();
  if (s == "complex" || s == "c") return complex();
  if (s == "quaternion" || s == "h") return quaternion();
  if (s == "m2r") return m2r();
  if (s == "m3r") return m3r();
  if (s == "m4r") return m4r();
  if (s == "m2c") return m2c();
  if (s == "dual") return dual();
  if (s == "cross3" || s == "cross") return cross3();
  if (s.rfind("diag", 0) == 0) {
    std::string rest = s.substr(4);
    if (rest == "onal") return diagonal(4);
    int n = rest.empty() ? 4 : std::stoi(rest);
    return diagonal(n);
  }
  throw std::invalid_argument("unknown algebra name: " + std::string(text));
}

std::vector<AlgebraId> all_algebras(int diagonal_n) {
  return {AlgebraId::real(),   AlgebraId::complex(), AlgebraId::quaternion(),
          AlgebraId::m2r(),    AlgebraId::m3r(),     AlgebraId::m4r(),
          AlgebraId::m2c(),    AlgebraId::dual(),    AlgebraId::cross3(),
          AlgebraId::diagonal(diagonal_n)};
}

}  // namespace algnn
