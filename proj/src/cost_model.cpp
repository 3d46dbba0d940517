#include "algnn/cost_model.hpp"

#include <map>
#include <ostream>
#include <stdexcept>

namespace algnn::cost {

namespace {

/// Additions inside one product: every entry past the first contributing to
/// an output component costs one add.
long long adds_per_product(const StructureTable& table) {
  std::map<int, int> per_component;
  for (const TableEntry& e : table.entries) ++per_component[e.k];
  long long adds = 0;
  for (const auto& [k, n] : per_component) adds += n - 1;
  return adds;
}

}  // namespace

ProductCost product_cost(const AlgebraId& algebra) {
  const StructureTable& table = structure_table(algebra);
  ProductCost c;
  c.multiplies = static_cast<long long>(table.entries.size());
  c.values_loaded = 2LL * table.dim;
  c.weight_size = table.dim;

  // Weight reuse: entries per left component, when uniform.
  std::vector<int> per_left(table.dim, 0);
  for (const TableEntry& e : table.entries) ++per_left[e.i];
  bool uniform = true;
  for (int n : per_left) uniform &= (n == per_left[0]);
  if (uniform && table.dim > 0) c.weight_reuse = per_left[0];
  return c;
}

double compute_density(const AlgebraId& algebra) {
  const ProductCost c = product_cost(algebra);
  return static_cast<double>(c.multiplies) /
         static_cast<double>(c.values_loaded);
}

CostRow layer_cost(const LayerSpec& spec, const CostOptions& opts) {
  CostRow row;
  row.layer = spec.name;
  row.algebra = spec.algebra.name();
  row.tuples_in = spec.tuples_in;
  row.tuples_out = spec.tuples_out;
  const int dim = spec.algebra.dim();
  const ProductCost pc = product_cost(spec.algebra);

  switch (spec.kind) {
    case LayerKind::kLinear:
    case LayerKind::kConv2d: {
      if (spec.tuples_in == 0 || spec.tuples_out == 0)
        throw std::invalid_argument("layer_cost: unspecified shape for " +
                                    spec.name);
      const long long products =
          static_cast<long long>(spec.tuple_products());
      const long long out_tuples =
          static_cast<long long>(spec.tuples_out) * spec.out_positions;
      row.real_params = static_cast<long long>(spec.weight_tuples()) * dim +
                        (spec.bias ? static_cast<long long>(spec.tuples_out) * dim
                                   : 0);
      row.multiplies = products * pc.multiplies;
      row.values_loaded = products * pc.values_loaded;
      const long long contribs =
          static_cast<long long>(spec.tuples_in) * spec.kh * spec.kw;
      row.adds = products * adds_per_product(structure_table(spec.algebra)) +
                 out_tuples * dim * (contribs - 1) +
                 (spec.bias ? out_tuples * dim : 0);
      break;
    }
    case LayerKind::kEmbedding:
      row.real_params =
          static_cast<long long>(spec.tuples_in) * spec.tuples_out * dim;
      break;
    case LayerKind::kLift: {
      // Affine lift: one scale and one shift per extra component.
      row.real_params = 2LL * (dim - 1);
      const long long elems = static_cast<long long>(spec.out_positions);
      row.multiplies = elems * (dim - 1);
      row.adds = elems * (dim - 1);
      row.values_loaded = 2 * row.multiplies;
      break;
    }
    case LayerKind::kBatchNorm: {
      row.real_params = 2LL * spec.tuples_out * dim;  // scale and shift
      if (opts.include_pointwise) {
        const long long comps =
            static_cast<long long>(spec.out_positions) * spec.tuples_out * dim;
        row.multiplies = comps;
        row.adds = comps;
        row.values_loaded = 2 * comps;
      }
      break;
    }
    case LayerKind::kActivation: {
      if (opts.include_pointwise) {
        const long long comps =
            static_cast<long long>(spec.out_positions) * spec.tuples_out * dim;
        row.multiplies = comps;
        row.values_loaded = comps;
      }
      break;
    }
  }
  return row;
}

CostReport model_cost(const ModelSpec& model, const MaskFile* mask,
                      const CostOptions& opts) {
  CostReport report;
  report.totals.layer = "TOTAL";
  for (const LayerSpec& spec : model.layers) {
    CostRow row = layer_cost(spec, opts);
    if (mask) {
      if (const MaskEntry* entry = mask->find(spec.name)) {
        const int dim = spec.algebra.dim();
        std::size_t pruned = 0;
        for (char c : entry->pruned) pruned += c != 0;
        if (!mask->component_mode) {
          if (entry->pruned.size() != spec.weight_tuples())
            throw std::invalid_argument("model_cost: mask size mismatch for " +
                                        spec.name);
          // A fully masked tuple skips its whole product at every position.
          const ProductCost pc = product_cost(spec.algebra);
          const long long skipped =
              static_cast<long long>(pruned) * spec.out_positions;
          row.multiplies -= skipped * pc.multiplies;
          row.values_loaded -= skipped * pc.values_loaded;
          row.real_params -= static_cast<long long>(pruned) * dim;
        } else {
          // Component masks zero parameters but skip no products.
          row.real_params -= static_cast<long long>(pruned);
        }
      }
    }
    report.totals.real_params += row.real_params;
    report.totals.multiplies += row.multiplies;
    report.totals.adds += row.adds;
    report.totals.values_loaded += row.values_loaded;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_cost_csv(const CostReport& report, std::ostream& out) {
  out << "# algnn-cost-csv v1\n";
  out << "layer,algebra,tuples_in,tuples_out,real_params,multiplies,adds,"
         "values_loaded\n";
  auto put = [&out](const CostRow& r) {
    out << r.layer << ',' << r.algebra << ',' << r.tuples_in << ','
        << r.tuples_out << ',' << r.real_params << ',' << r.multiplies << ','
        << r.adds << ',' << r.values_loaded << '\n';
  };
  for (const CostRow& r : report.rows) put(r);
  put(report.totals);
}

}  // namespace algnn::cost
