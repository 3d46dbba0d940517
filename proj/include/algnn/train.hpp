#pragma once

#include <string>

#include "algnn/config.hpp"
#include "algnn/model.hpp"
#include "algnn/pruning.hpp"

namespace algnn::train {

struct RunResult {
  double final_loss = 0.0;
  /// Train accuracy for classification tasks (test accuracy for cifar10 when
  /// a test batch is present), bits-per-character for the text task.
  double final_metric = 0.0;
  double final_sparsity = 0.0;
  std::size_t steps = 0;
  std::string checkpoint_path;
  std::string mask_path;
  std::string metrics_path;
  std::string sparsity_path;
};

/// Runs the configured training loop (optionally with the pruning schedule
/// interleaved), writing metrics, checkpoint, and mask files into out_dir.
/// Deterministic given (config, seed): single-threaded, all randomness
/// seeded. Throws std::runtime_error after writing a last-good checkpoint if
/// the loss turns non-finite.
RunResult run_training(const Config& cfg, const std::string& out_dir,
                       bool prune_enabled);

/// TaskInfo for a config (dataset shapes without loading heavyweight data).
TaskInfo task_info(const Config& cfg);

}  // namespace algnn::train
