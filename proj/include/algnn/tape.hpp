#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "algnn/layers.hpp"
#include "algnn/rng.hpp"
#include "algnn/tensor.hpp"
#include "algnn/tuple_ops.hpp"

namespace algnn {

/// Adjoints of a single bilinear product:
///   x_adj[i] = sum entries (i,j,k,s): s * out_adj[k] * y[j]
///   y_adj[j] = sum entries (i,j,k,s): s * out_adj[k] * x[i]
std::pair<Tuple, Tuple> backward_mul(const StructureTable& table, const Tuple& x,
                                     const Tuple& y, const Tuple& out_adjoint);

/// Adjoint of the tuple L2 norm; returns the zero tuple at x = 0 (subgradient
/// choice), never a division error.
Tuple backward_norm(const Tuple& x, double out_adjoint);

using ValueId = std::size_t;

enum class OpKind {
  kInput,
  kParam,
  kLinear,
  kConv2d,
  kAdd,
  kSub,
  kCompMul,
  kTupleMul,
  kAffine,
  kActivation,
  kBatchNorm,
  kTupleGate,
  kLift,
  kLogitsReadout,
  kFlatAttention,
  kDropout,
  kEmbedding,
  kGlobalAvgPool,
  kSum,
  kSoftmaxCrossEntropy,
};

/// Append-only record of forward primitives; node references always point to
/// earlier entries, so one reverse sweep visits each node exactly once.
class Tape {
 public:
  struct Node {
    OpKind kind;
    std::vector<ValueId> inputs;
    AlgebraTensor value;
    AlgebraTensor adjoint;  // empty until touched by backward
    bool has_adjoint = false;
    bool requires_grad = false;
    std::optional<nn::Activation> act;           // set for activation nodes
    std::function<void(Tape&, Node&)> backprop;  // null for leaves
  };

  ValueId input(AlgebraTensor value);
  ValueId param(AlgebraTensor value);

  ValueId linear(ValueId x, ValueId weight,
                 std::optional<ValueId> bias = std::nullopt);
  ValueId conv2d(ValueId x, ValueId weight, std::optional<ValueId> bias,
                 int stride, int pad);
  ValueId add(ValueId x, ValueId y);
  ValueId sub(ValueId x, ValueId y);
  /// Componentwise (Hadamard over tuple components) product.
  ValueId comp_mul(ValueId x, ValueId y);
  /// Elementwise algebra product mul(x[t], y[t]).
  ValueId tuple_mul(ValueId x, ValueId y);
  /// y = a * x + b componentwise, constants.
  ValueId affine(ValueId x, double a, double b);
  ValueId activation(ValueId x, nn::Activation kind);
  ValueId batchnorm(ValueId x, ValueId gamma, ValueId beta,
                    nn::BatchNormState& state, bool training);
  ValueId tuple_gate(ValueId x);
  ValueId lift(ValueId x_real, const nn::LiftParams& shape,
               std::span<const ValueId> param_ids);
  ValueId logits_readout(ValueId x);
  ValueId flat_attention(ValueId k, ValueId q);
  ValueId dropout(ValueId x, double rate, Rng& rng, bool training);
  ValueId embedding(ValueId table, std::vector<int> indices);
  ValueId global_avg_pool(ValueId x);
  ValueId sum(ValueId x);
  ValueId softmax_cross_entropy(ValueId logits, std::vector<int> labels);

  /// Composite: classical GRU cell with algebra linears and componentwise
  /// gates. Returns h_next. Parameter id order: wx_update, wh_update,
  /// b_update, wx_reset, wh_reset, b_reset, wx_cand, wh_cand, b_cand.
  ValueId gru_cell(ValueId x, ValueId h_prev,
                   std::span<const ValueId> param_ids);

  void backward(ValueId loss);

  /// Adds g into the adjoint of id when that node needs gradients; used by
  /// op backprop functions.
  void accum_adjoint(ValueId id, const AlgebraTensor& g);

  const AlgebraTensor& value(ValueId id) const { return nodes_[id].value; }
  /// Adjoint of a node; zeros if backward never reached it.
  AlgebraTensor grad(ValueId id) const;
  const Node& node(ValueId id) const { return nodes_[id]; }
  std::size_t node_count() const { return nodes_.size(); }

  /// First recorded node holding a non-finite value, with a printable name.
  std::optional<std::pair<ValueId, std::string>> first_nonfinite() const;

  /// Smallest distance to a gradient kink over all relu inputs and tuple-gate
  /// means; +inf when no kinked op was recorded.
  double min_kink_distance() const;

  /// Fraction of tuples zeroed by the most recent tuple_gate (diagnostics).
  double last_gate_zero_fraction() const { return gate_zero_fraction_; }

 private:
  ValueId push(Node node);
  AlgebraTensor& adjoint_of(ValueId id);

  std::vector<Node> nodes_;
  std::vector<nn::Activation> activation_kinds_;  // parallel metadata
  double gate_zero_fraction_ = 0.0;
};

std::string op_name(OpKind kind);

/// Per-parameter adjoints collected after backward, in the order the params
/// were registered.
struct GradientBundle {
  std::vector<ValueId> params;
  std::vector<AlgebraTensor> grads;
};

GradientBundle collect_grads(const Tape& tape, std::span<const ValueId> params);

/// One GRU step without gradient tracking (runs on a scratch tape).
AlgebraTensor gru_forward(const AlgebraTensor& x, const AlgebraTensor& h_prev,
                          const nn::GruParams& p);

/// Registers every tensor of a parameter pack on the tape in canonical order;
/// returns the ids (gru_cell's expected order for GruParams).
std::vector<ValueId> register_gru_params(Tape& tape, const nn::GruParams& p);

}  // namespace algnn
