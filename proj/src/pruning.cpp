#include "algnn/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "algnn/tuple_ops.hpp"

namespace algnn::prune {

PruneSchedule PruneSchedule::standard(std::size_t total_steps,
                                      double final_sparsity,
                                      std::size_t interval) {
  if (final_sparsity < 0.0 || final_sparsity >= 1.0)
    throw std::invalid_argument("final sparsity must be in [0, 1)");
  if (interval < 1) throw std::invalid_argument("prune interval must be >= 1");
  PruneSchedule s;
  s.total_steps = total_steps;
  s.start = total_steps / 5;
  s.end = total_steps * 4 / 5;
  if (s.start >= s.end)
    throw std::invalid_argument("step budget too small for the prune ramp");
  s.interval = interval;
  s.final_sparsity = final_sparsity;
  return s;
}

bool PruneSchedule::is_boundary(std::size_t step) const {
  return step >= start && step <= end && (step - start) % interval == 0;
}

double PruneSchedule::target_sparsity(std::size_t step) const {
  if (step < start) return 0.0;
  if (step >= end) return final_sparsity;
  const double t =
      static_cast<double>(step - start) / static_cast<double>(end - start);
  const double remain = 1.0 - t;
  return final_sparsity * (1.0 - remain * remain * remain);
}

PruneCriterion parse_criterion(const std::string& name) {
  if (name == "frobenius") return PruneCriterion::kFrobenius;
  if (name == "determinant" || name == "det") return PruneCriterion::kDeterminant;
  if (name == "min_eig" || name == "min_eigenvalue")
    return PruneCriterion::kMinEigenvalue;
  if (name == "max_eig" || name == "max_eigenvalue")
    return PruneCriterion::kMaxEigenvalue;
  if (name == "component") return PruneCriterion::kComponent;
  throw std::invalid_argument("unknown prune criterion: " + name);
}

std::string criterion_name(PruneCriterion c) {
  switch (c) {
    case PruneCriterion::kFrobenius: return "frobenius";
    case PruneCriterion::kDeterminant: return "determinant";
    case PruneCriterion::kMinEigenvalue: return "min_eig";
    case PruneCriterion::kMaxEigenvalue: return "max_eig";
    case PruneCriterion::kComponent: return "component";
  }
  return "?";
}

double criterion_score(const AlgebraId& algebra, const double* tuple,
                       PruneCriterion criterion) {
  switch (criterion) {
    case PruneCriterion::kFrobenius:
      return tuple_norm(std::span<const double>(
          tuple, static_cast<std::size_t>(algebra.dim())));
    case PruneCriterion::kDeterminant:
    case PruneCriterion::kMinEigenvalue:
    case PruneCriterion::kMaxEigenvalue: {
      if (algebra != AlgebraId::m2r())
        throw std::invalid_argument(
            "criterion " + criterion_name(criterion) +
            " is defined only for the m2r algebra, got " + algebra.name());
      if (criterion == PruneCriterion::kDeterminant)
        return std::abs(tuple[0] * tuple[3] - tuple[1] * tuple[2]);
      const Spectrum2x2 s = spectrum_2x2(std::span<const double>(tuple, 4));
      return criterion == PruneCriterion::kMaxEigenvalue ? s.eig_mag[0]
                                                         : s.eig_mag[1];
    }
    case PruneCriterion::kComponent:
      return std::abs(tuple[0]);
  }
  throw std::invalid_argument("unknown criterion");
}

void PruneState::register_layer(const std::string& name, AlgebraTensor* weights,
                                bool frozen) {
  PruneLayer layer;
  layer.name = name;
  layer.weights = weights;
  layer.frozen = frozen;
  const std::size_t units =
      component_mode() ? weights->size() : weights->tuple_count();
  layer.pruned.assign(units, 0);
  layers.push_back(std::move(layer));
}

std::size_t PruneState::prunable_units() const {
  std::size_t n = 0;
  for (const PruneLayer& l : layers)
    if (!l.frozen) n += l.pruned.size();
  return n;
}

std::size_t PruneState::pruned_units() const {
  std::size_t n = 0;
  for (const PruneLayer& l : layers)
    for (char c : l.pruned) n += c != 0;
  return n;
}

double PruneState::sparsity() const {
  const std::size_t n = prunable_units();
  return n ? static_cast<double>(pruned_units()) / static_cast<double>(n) : 0.0;
}

double PruneState::sparsity_all() const {
  std::size_t total = 0;
  for (const PruneLayer& l : layers) total += l.pruned.size();
  return total ? static_cast<double>(pruned_units()) /
                     static_cast<double>(total)
               : 0.0;
}

namespace {

struct Candidate {
  double score;
  std::size_t layer;
  std::size_t unit;
};

void zero_unit(PruneLayer& layer, bool component_mode, std::size_t unit) {
  if (component_mode) {
    layer.weights->values()[unit] = 0.0;
  } else {
    double* t = layer.weights->tuple(unit);
    const int dim = layer.weights->dim();
    for (int i = 0; i < dim; ++i) t[i] = 0.0;
  }
}

void select_and_mask(PruneState& state, std::vector<std::size_t> layer_subset,
                     std::size_t target_count) {
  std::size_t current = 0;
  for (std::size_t li : layer_subset)
    for (char c : state.layers[li].pruned) current += c != 0;
  if (target_count <= current) return;  // never unmask

  std::vector<Candidate> candidates;
  const bool comp = state.component_mode();
  for (std::size_t li : layer_subset) {
    PruneLayer& layer = state.layers[li];
    const int dim = layer.weights->dim();
    for (std::size_t u = 0; u < layer.pruned.size(); ++u) {
      if (layer.pruned[u]) continue;
      const double score =
          comp ? std::abs(layer.weights->values()[u])
               : criterion_score(layer.weights->algebra(),
                                 layer.weights->tuple(u), state.criterion);
      (void)dim;
      candidates.push_back({score, li, u});
    }
  }
  const std::size_t need = target_count - current;
  if (need > candidates.size())
    throw std::invalid_argument("prune_step: target exceeds available units");
  auto cmp = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.unit < b.unit;
  };
  std::nth_element(candidates.begin(), candidates.begin() + (need - 1),
                   candidates.end(), cmp);
  for (std::size_t i = 0; i < need; ++i) {
    PruneLayer& layer = state.layers[candidates[i].layer];
    layer.pruned[candidates[i].unit] = 1;
    zero_unit(layer, comp, candidates[i].unit);
  }
}

}  // namespace

void prune_step(PruneState& state, std::size_t step) {
  const double target = state.schedule.target_sparsity(step);
  if (state.scope == PruneScope::kGlobal) {
    std::vector<std::size_t> subset;
    std::size_t prunable = 0;
    for (std::size_t li = 0; li < state.layers.size(); ++li)
      if (!state.layers[li].frozen) {
        subset.push_back(li);
        prunable += state.layers[li].pruned.size();
      }
    const auto target_count = static_cast<std::size_t>(
        std::ceil(target * static_cast<double>(prunable)));
    select_and_mask(state, std::move(subset), target_count);
  } else {
    for (std::size_t li = 0; li < state.layers.size(); ++li) {
      if (state.layers[li].frozen) continue;
      const auto target_count = static_cast<std::size_t>(std::ceil(
          target * static_cast<double>(state.layers[li].pruned.size())));
      select_and_mask(state, {li}, target_count);
    }
  }
}

void apply_mask(const PruneLayer& layer, bool component_mode,
                AlgebraTensor& tensor) {
  if (component_mode) {
    for (std::size_t u = 0; u < layer.pruned.size(); ++u)
      if (layer.pruned[u]) tensor.values()[u] = 0.0;
  } else {
    const int dim = tensor.dim();
    for (std::size_t u = 0; u < layer.pruned.size(); ++u)
      if (layer.pruned[u]) {
        double* t = tensor.tuple(u);
        for (int i = 0; i < dim; ++i) t[i] = 0.0;
      }
  }
}

MaskFile to_mask_file(const PruneState& state) {
  MaskFile file;
  file.component_mode = state.component_mode();
  for (const PruneLayer& l : state.layers)
    file.entries.push_back({l.name, l.frozen, l.pruned});
  return file;
}

void load_masks(PruneState& state, const MaskFile& file) {
  if (file.component_mode != state.component_mode())
    throw std::invalid_argument("mask mode does not match prune criterion");
  for (PruneLayer& l : state.layers) {
    const MaskEntry* e = file.find(l.name);
    if (!e) continue;
    if (e->pruned.size() != l.pruned.size())
      throw std::invalid_argument("mask size mismatch for layer " + l.name);
    l.pruned = e->pruned;
    apply_mask(l, state.component_mode(), *l.weights);
  }
}

SparsityReport sparsity_report(const PruneState& state,
                               const cost::ModelSpec& model) {
  const MaskFile masks = to_mask_file(state);
  SparsityReport report;
  report.sparsity_prunable = state.sparsity();
  report.sparsity_all = state.sparsity_all();
  const cost::CostReport costs =
      cost::model_cost(model, &masks, cost::CostOptions{});
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const cost::LayerSpec& spec = model.layers[i];
    SparsityRow row;
    row.layer = spec.name;
    if (const MaskEntry* e = masks.find(spec.name)) {
      row.units_total = e->pruned.size();
      for (char c : e->pruned) row.units_masked += c != 0;
    } else {
      row.units_total = spec.weight_tuples();
    }
    row.params_remaining = costs.rows[i].real_params;
    row.multiplies_remaining = costs.rows[i].multiplies;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_sparsity_csv(const SparsityReport& report, std::ostream& out) {
  out << "layer,tuples_total,tuples_masked,params_remaining,"
         "multiplies_remaining\n";
  for (const SparsityRow& r : report.rows)
    out << r.layer << ',' << r.units_total << ',' << r.units_masked << ','
        << r.params_remaining << ',' << r.multiplies_remaining << '\n';
  out << "# sparsity_prunable=" << report.sparsity_prunable << '\n';
  out << "# sparsity_all=" << report.sparsity_all << '\n';
}

}  // namespace algnn::prune
