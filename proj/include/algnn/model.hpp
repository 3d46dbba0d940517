#pragma once

#include <map>
#include <string>
#include <vector>

#include "algnn/config.hpp"
#include "algnn/cost_model.hpp"
#include "algnn/datasets.hpp"
#include "algnn/serialize.hpp"
#include "algnn/tape.hpp"

namespace algnn {

struct ParamInfo {
  std::string name;
  AlgebraTensor tensor;
  bool register_prunable = false;  // weight tensors tracked by the pruner
  bool frozen = false;             // tracked but never masked
};

/// Static facts about the training task the model is built for.
struct TaskInfo {
  std::string task;  // spiral | blobs | cifar10 | text
  std::size_t features = 0;
  std::size_t classes = 0;
  std::size_t image_hw = 0;
  std::size_t channels = 0;
  std::size_t vocab = 0;
  std::size_t seq = 0;
};

/// A configured network: an input lift, a stack of algebra layers, and the
/// norm readout, with per-family recipes (mlp, conv, gru).
class Model {
 public:
  struct Output {
    ValueId logits = 0;  // real logits [batch (x seq), classes]
    ValueId loss = 0;    // scalar
  };

  static Model build(const Config& cfg, const TaskInfo& info);

  /// Registers parameters, builds the graph for one batch, and returns the
  /// loss. `dropout_rng` drives dropout masks when training.
  Output forward(Tape& tape, const data::Batch& batch, bool training,
                 Rng& dropout_rng, std::vector<ValueId>* param_ids = nullptr);

  std::vector<ParamInfo>& params() { return params_; }
  const std::vector<ParamInfo>& params() const { return params_; }
  const AlgebraId& algebra() const { return algebra_; }
  const TaskInfo& task() const { return info_; }
  const cost::ModelSpec& cost_spec() const { return spec_; }

  /// Fraction of correct argmax predictions for a classification batch
  /// given the logits value.
  static double accuracy(const AlgebraTensor& logits,
                         const std::vector<int>& labels);

  Checkpoint to_checkpoint(const std::string& config_text) const;
  void load_params(const Checkpoint& ckpt);

 private:
  std::size_t add_param(const std::string& name, AlgebraTensor tensor,
                        bool prunable, bool frozen);
  ValueId lift_real_input(Tape& tape, ValueId x,
                          const std::vector<ValueId>& ids) const;

  AlgebraId algebra_;
  TaskInfo info_;
  std::string type_;
  nn::Activation act_ = nn::Activation::kRelu;
  bool bias_ = true;
  bool batchnorm_ = false;
  double dropout_ = 0.0;
  std::vector<std::size_t> hidden_;
  std::size_t embed_ = 0;
  std::size_t gru_hidden_ = 0;
  nn::LiftParams lift_shape_;  // tensor shapes only; data lives in params_
  std::vector<std::size_t> lift_param_indices_;
  std::vector<ParamInfo> params_;
  std::map<std::string, std::size_t> by_name_;
  std::vector<nn::BatchNormState> bn_states_;
  cost::ModelSpec spec_;
};

}  // namespace algnn
