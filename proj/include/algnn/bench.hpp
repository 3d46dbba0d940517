#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "algnn/algebra.hpp"

namespace algnn::bench {

struct BenchOptions {
  std::vector<AlgebraId> algebras;  // empty = all, diagonal at n=4
  int repetitions = 5;              // 0 = analytic columns only
  int warmup = 2;
};

struct BenchRow {
  std::string algebra;
  std::string kernel;  // matvec | matmul | dwconv
  std::string shape;
  int repetitions = 0;
  double seconds_per_call = 0.0;
  unsigned long long counted_multiplies = 0;    // instrumented, one call
  unsigned long long predicted_multiplies = 0;  // cost model
  unsigned long long operand_bytes = 0;         // 2 * dim * 8 per product
  double multiplies_per_byte = 0.0;
  double analytic_density = 0.0;  // per-product multiplies / values loaded
};

std::vector<BenchRow> run_bench(const BenchOptions& opts);

/// Header: algebra,kernel,shape,reps,seconds_per_call,counted_multiplies,
/// predicted_multiplies,operand_bytes,multiplies_per_byte,analytic_density.
/// Timing and counted columns are empty when repetitions = 0.
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace algnn::bench
