#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "algnn/cost_model.hpp"
#include "algnn/serialize.hpp"
#include "algnn/tensor.hpp"

namespace algnn::prune {

/// Cubic magnitude-pruning ramp: zero before `start`, final_sparsity after
/// `end`, and s_f * (1 - (1 - (step-start)/(end-start))^3) between, sampled
/// at interval boundaries.
struct PruneSchedule {
  std::size_t total_steps = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t interval = 100;
  double final_sparsity = 0.0;

  /// start = 20% and end = 80% of the step budget.
  static PruneSchedule standard(std::size_t total_steps, double final_sparsity,
                                std::size_t interval = 100);

  bool is_boundary(std::size_t step) const;
  double target_sparsity(std::size_t step) const;
};

enum class PruneCriterion {
  kFrobenius,
  kDeterminant,
  kMinEigenvalue,
  kMaxEigenvalue,
  kComponent,
};

PruneCriterion parse_criterion(const std::string& name);
std::string criterion_name(PruneCriterion c);

/// Score of one tuple under the criterion; the lowest scores are pruned
/// first. Determinant and eigenvalue criteria require the m2r algebra.
double criterion_score(const AlgebraId& algebra, const double* tuple,
                       PruneCriterion criterion);

enum class PruneScope { kGlobal, kPerLayer };

/// One prunable (or frozen) weight tensor registered with the pruner. The
/// tensor stays owned by the caller.
struct PruneLayer {
  std::string name;
  AlgebraTensor* weights = nullptr;
  bool frozen = false;
  std::vector<char> pruned;  // per tuple; per component in component mode
};

struct PruneState {
  PruneSchedule schedule;
  PruneCriterion criterion = PruneCriterion::kFrobenius;
  PruneScope scope = PruneScope::kGlobal;
  std::vector<PruneLayer> layers;

  bool component_mode() const {
    return criterion == PruneCriterion::kComponent;
  }
  void register_layer(const std::string& name, AlgebraTensor* weights,
                      bool frozen);

  std::size_t prunable_units() const;
  std::size_t pruned_units() const;
  /// Masked fraction of prunable units.
  double sparsity() const;
  /// Masked fraction counting frozen layers' units too.
  double sparsity_all() const;
};

/// Masks the lowest-score unmasked units until ceil(target * N_prunable)
/// units are masked, zeroing the weights. Ties break on (layer index, unit
/// index) ascending. Targets at or below the current sparsity are a no-op;
/// units are never unmasked.
void prune_step(PruneState& state, std::size_t step);

/// Zeroes masked entries of a tensor shaped like the layer's weights
/// (applied to weights after optimizer updates and to their gradients).
void apply_mask(const PruneLayer& layer, bool component_mode,
                AlgebraTensor& tensor);

MaskFile to_mask_file(const PruneState& state);
void load_masks(PruneState& state, const MaskFile& file);

struct SparsityRow {
  std::string layer;
  std::size_t units_total = 0;
  std::size_t units_masked = 0;
  long long params_remaining = 0;
  long long multiplies_remaining = 0;
};

struct SparsityReport {
  std::vector<SparsityRow> rows;
  double sparsity_prunable = 0.0;
  double sparsity_all = 0.0;
};

/// Per-layer masked counts plus remaining parameters and inference
/// multiplies; fully masked tuples skip their whole product, component masks
/// skip none.
SparsityReport sparsity_report(const PruneState& state,
                               const cost::ModelSpec& model);

/// One CSV row per layer:
///   layer,tuples_total,tuples_masked,params_remaining,multiplies_remaining
/// followed by summary comment lines with both sparsity conventions.
void write_sparsity_csv(const SparsityReport& report, std::ostream& out);

}  // namespace algnn::prune
