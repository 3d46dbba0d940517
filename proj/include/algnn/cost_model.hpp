#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "algnn/algebra.hpp"
#include "algnn/serialize.hpp"

namespace algnn::cost {

/// Per-product constants for one algebra: multiply count, operand values
/// loaded, tuple component count, and weight reuse (output components each
/// loaded weight component feeds; undefined when non-uniform, as for dual
/// numbers).
struct ProductCost {
  long long multiplies = 0;
  long long values_loaded = 0;
  long long weight_size = 0;
  std::optional<long long> weight_reuse;
};

ProductCost product_cost(const AlgebraId& algebra);

/// Multiplies per value loaded for one product.
double compute_density(const AlgebraId& algebra);

enum class LayerKind {
  kLinear,
  kConv2d,
  kEmbedding,
  kLift,
  kBatchNorm,
  kActivation,
};

/// Static description of one cost-bearing layer. `out_positions` is the
/// number of spatial output positions per sample (h_out * w_out for convs,
/// 1 for linears, element count for pointwise rows).
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kLinear;
  AlgebraId algebra;
  std::size_t tuples_in = 0;
  std::size_t tuples_out = 0;
  std::size_t kh = 1, kw = 1;
  std::size_t out_positions = 1;
  bool bias = false;

  std::size_t weight_tuples() const { return tuples_in * tuples_out * kh * kw; }
  /// Algebra products per sample.
  std::size_t tuple_products() const {
    return (kind == LayerKind::kLinear || kind == LayerKind::kConv2d)
               ? weight_tuples() * out_positions
               : 0;
  }
};

struct ModelSpec {
  std::vector<LayerSpec> layers;
};

struct CostRow {
  std::string layer;
  std::string algebra;
  std::size_t tuples_in = 0;
  std::size_t tuples_out = 0;
  long long real_params = 0;
  long long multiplies = 0;
  long long adds = 0;
  long long values_loaded = 0;
};

struct CostReport {
  std::vector<CostRow> rows;
  CostRow totals;  // layer = "TOTAL"
};

struct CostOptions {
  /// Count normalization and activation rows at one op per component.
  bool include_pointwise = false;
};

CostRow layer_cost(const LayerSpec& spec, const CostOptions& opts = {});

/// Aggregates layer costs; a mask (matched by layer name) removes whole
/// tuple products in tuple mode, or only parameters in component mode.
CostReport model_cost(const ModelSpec& model, const MaskFile* mask = nullptr,
                      const CostOptions& opts = {});

/// Fixed, versioned header: a "# algnn-cost-csv v1" comment line, then
/// layer,algebra,tuples_in,tuples_out,real_params,multiplies,adds,values_loaded
void write_cost_csv(const CostReport& report, std::ostream& out);

}  // namespace algnn::cost
