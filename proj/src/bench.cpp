#include "algnn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <memory>
#include <ostream>

#include "algnn/cost_model.hpp"
#include "algnn/kernels.hpp"
#include "algnn/rng.hpp"

namespace algnn::bench {

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

struct KernelCase {
  std::string name;
  std::string shape;
  std::size_t tuple_products;
  std::function<void()> run;
};

// out[o] = sum_i W[o,i] * x[i]
KernelCase matvec_case(const AlgebraId& alg, std::size_t rows,
                       std::size_t cols, Rng& rng) {
  const int dim = alg.dim();
  auto w = std::make_shared<std::vector<double>>(
      random_values(rng, rows * cols * dim));
  auto x = std::make_shared<std::vector<double>>(random_values(rng, cols * dim));
  auto out = std::make_shared<std::vector<double>>(rows * dim);
  KernelCase c;
  c.name = "matvec";
  c.shape = std::to_string(rows) + "x" + std::to_string(cols);
  c.tuple_products = rows * cols;
  c.run = [=]() {
    std::fill(out->begin(), out->end(), 0.0);
    for (std::size_t o = 0; o < rows; ++o)
      kernels::contract(alg, w->data() + o * cols * dim, dim, x->data(), dim,
                        out->data() + o * dim, cols);
  };
  return c;
}

// C[m,n] = sum_k A[m,k] * B[k,n]
KernelCase matmul_case(const AlgebraId& alg, std::size_t m, std::size_t k,
                       std::size_t n, Rng& rng) {
  const int dim = alg.dim();
  auto a = std::make_shared<std::vector<double>>(random_values(rng, m * k * dim));
  auto b = std::make_shared<std::vector<double>>(random_values(rng, k * n * dim));
  auto out = std::make_shared<std::vector<double>>(m * n * dim);
  KernelCase c;
  c.name = "matmul";
  c.shape = std::to_string(m) + "x" + std::to_string(k) + "x" +
            std::to_string(n);
  c.tuple_products = m * k * n;
  c.run = [=]() {
    std::fill(out->begin(), out->end(), 0.0);
    for (std::size_t mi = 0; mi < m; ++mi)
      for (std::size_t ki = 0; ki < k; ++ki)
        kernels::axpy(alg, a->data() + (mi * k + ki) * dim,
                      b->data() + ki * n * dim, dim, out->data() + mi * n * dim,
                      dim, n);
  };
  return c;
}

// Depthwise 2d convolution, planar [c][h][w] tuples, valid padding.
KernelCase dwconv_case(const AlgebraId& alg, std::size_t channels,
                       std::size_t hw, std::size_t ksize, Rng& rng) {
  const int dim = alg.dim();
  const std::size_t out_hw = hw - ksize + 1;
  auto img = std::make_shared<std::vector<double>>(
      random_values(rng, channels * hw * hw * dim));
  auto w = std::make_shared<std::vector<double>>(
      random_values(rng, channels * ksize * ksize * dim));
  auto out =
      std::make_shared<std::vector<double>>(channels * out_hw * out_hw * dim);
  KernelCase c;
  c.name = "dwconv";
  c.shape = std::to_string(channels) + "x" + std::to_string(hw) + "x" +
            std::to_string(hw) + "k" + std::to_string(ksize);
  c.tuple_products = channels * out_hw * out_hw * ksize * ksize;
  c.run = [=]() {
    std::fill(out->begin(), out->end(), 0.0);
    for (std::size_t ch = 0; ch < channels; ++ch)
      for (std::size_t oy = 0; oy < out_hw; ++oy)
        for (std::size_t ky = 0; ky < ksize; ++ky)
          for (std::size_t kx = 0; kx < ksize; ++kx) {
            const double* wk =
                w->data() + ((ch * ksize + ky) * ksize + kx) * dim;
            const double* row =
                img->data() + ((ch * hw + oy + ky) * hw + kx) * dim;
            double* orow = out->data() + ((ch * out_hw + oy) * out_hw) * dim;
            kernels::axpy(alg, wk, row, dim, orow, dim, out_hw);
          }
  };
  return c;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  std::vector<AlgebraId> algebras =
      opts.algebras.empty() ? all_algebras() : opts.algebras;
  std::vector<BenchRow> rows;
  Rng rng(0xbe9c5ULL);

  for (const AlgebraId& alg : algebras) {
    const cost::ProductCost pc = cost::product_cost(alg);
    std::vector<KernelCase> cases;
    cases.push_back(matvec_case(alg, 256, 256, rng));
    cases.push_back(matmul_case(alg, 48, 48, 48, rng));
    cases.push_back(dwconv_case(alg, 32, 32, 3, rng));

    for (KernelCase& item : cases) {
      BenchRow row;
      row.algebra = alg.name();
      row.kernel = item.name;
      row.shape = item.shape;
      row.repetitions = opts.repetitions;
      row.predicted_multiplies =
          static_cast<unsigned long long>(item.tuple_products) * pc.multiplies;
      row.operand_bytes = static_cast<unsigned long long>(item.tuple_products) *
                          pc.values_loaded * sizeof(double);
      row.analytic_density = cost::compute_density(alg);

      if (opts.repetitions > 0) {
        // Counted pass, instrumented.
        kernels::reset_counters();
        kernels::set_counting(true);
        item.run();
        kernels::set_counting(false);
        row.counted_multiplies = kernels::counters().multiplies;

        for (int i = 0; i < opts.warmup; ++i) item.run();
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < opts.repetitions; ++i) item.run();
        const auto t1 = std::chrono::steady_clock::now();
        row.seconds_per_call =
            std::chrono::duration<double>(t1 - t0).count() / opts.repetitions;
        row.multiplies_per_byte =
            static_cast<double>(row.counted_multiplies) /
            static_cast<double>(row.operand_bytes);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "algebra,kernel,shape,reps,seconds_per_call,counted_multiplies,"
         "predicted_multiplies,operand_bytes,multiplies_per_byte,"
         "analytic_density\n";
  for (const BenchRow& r : rows) {
    out << r.algebra << ',' << r.kernel << ',' << r.shape << ','
        << r.repetitions << ',';
    if (r.repetitions > 0)
      out << r.seconds_per_call << ',' << r.counted_multiplies << ',';
    else
      out << ",,";
    out << r.predicted_multiplies << ',' << r.operand_bytes << ',';
    if (r.repetitions > 0) out << r.multiplies_per_byte;
    out << ',' << r.analytic_density << '\n';
  }
}

}  // namespace algnn::bench
