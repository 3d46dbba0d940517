#include "algnn/train.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace algnn::train {

namespace {

struct LrSchedule {
  double base = 0.1;
  std::vector<std::pair<std::size_t, double>> drops;  // step -> factor

  double at(std::size_t step) const {
    double lr = base;
    for (const auto& [at_step, factor] : drops)
      if (step >= at_step) lr *= factor;
    return lr;
  }

  static LrSchedule parse(double base, const std::string& text) {
    LrSchedule s;
    s.base = base;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("bad lr drop spec: " + item);
      s.drops.emplace_back(std::stoull(item.substr(0, colon)),
                           std::stod(item.substr(colon + 1)));
    }
    return s;
  }
};

class Optimizer {
 public:
  Optimizer(const Config& cfg, const std::vector<ParamInfo>& params,
            double l2_scale)
      : kind_(cfg.get_string("opt.kind", "sgd")),
        momentum_(cfg.get_real("opt.momentum", 0.9)),
        l2_(cfg.get_real("opt.l2", 0.0) * l2_scale),
        schedule_(LrSchedule::parse(cfg.get_real("opt.lr", 0.1),
                                    cfg.get_string("opt.lr_drops", ""))) {
    if (kind_ != "sgd" && kind_ != "adam")
      throw std::runtime_error("unknown optimizer: " + kind_);
    for (const ParamInfo& p : params) {
      slot1_.push_back(zeros_like(p.tensor));
      if (kind_ == "adam") slot2_.push_back(zeros_like(p.tensor));
    }
  }

  void step(std::vector<ParamInfo>& params, const GradientBundle& grads,
            std::size_t step_index) {
    const double lr = schedule_.at(step_index);
    ++t_;
    for (std::size_t p = 0; p < params.size(); ++p) {
      AlgebraTensor& w = params[p].tensor;
      const AlgebraTensor& g = grads.grads[p];
      // L2 applies to weight matrices, not biases or normalization params.
      const bool decay = l2_ != 0.0 && params[p].register_prunable;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double grad =
            g.values()[i] + (decay ? l2_ * w.values()[i] : 0.0);
        if (kind_ == "sgd") {
          double& v = slot1_[p].values()[i];
          v = momentum_ * v + grad;
          w.values()[i] -= lr * v;
        } else {
          constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
          double& mval = slot1_[p].values()[i];
          double& vval = slot2_[p].values()[i];
          mval = b1 * mval + (1 - b1) * grad;
          vval = b2 * vval + (1 - b2) * grad * grad;
          const double mhat = mval / (1 - std::pow(b1, t_));
          const double vhat = vval / (1 - std::pow(b2, t_));
          w.values()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
      }
    }
  }

  std::vector<AlgebraTensor>& velocity() { return slot1_; }

 private:
  std::string kind_;
  double momentum_;
  double l2_;
  LrSchedule schedule_;
  int t_ = 0;
  std::vector<AlgebraTensor> slot1_;  // velocity / first moment
  std::vector<AlgebraTensor> slot2_;  // second moment (adam)
};

struct TaskData {
  data::PointSet points;
  data::Cifar10 cifar_train;
  data::Cifar10 cifar_test;
  bool has_cifar_test = false;
  data::ByteText text;
};

TaskData load_task(const Config& cfg, const TaskInfo& info) {
  TaskData d;
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  if (info.task == "spiral") {
    d.points = data::make_spiral(
        info.classes,
        static_cast<std::size_t>(cfg.get_int("data.samples_per_class", 256)),
        cfg.get_real("data.noise", 0.15), seed ^ 0xda7a5eedULL);
  } else if (info.task == "blobs") {
    d.points = data::make_blobs(
        info.classes,
        static_cast<std::size_t>(cfg.get_int("data.samples_per_class", 256)),
        cfg.get_real("data.blob_std", 0.5), seed ^ 0xda7a5eedULL);
  } else if (info.task == "cifar10") {
    const std::string dir = cfg.get_string("data.path", "");
    if (dir.empty())
      throw std::runtime_error("cifar10 task needs data.path = <dir>");
    d.cifar_train = data::Cifar10::load_dir(dir, /*train=*/true);
    try {
      d.cifar_test = data::Cifar10::load_dir(dir, /*train=*/false);
      d.has_cifar_test = true;
    } catch (const std::exception&) {
      d.has_cifar_test = false;
    }
  } else if (info.task == "text") {
    const std::string path = cfg.get_string("data.path", "");
    if (path.empty())
      throw std::runtime_error("text task needs data.path = <file>");
    d.text = data::ByteText::load_file(path);
  } else {
    throw std::runtime_error("unknown task: " + info.task);
  }
  return d;
}

double default_l2_scale(const Config& cfg, const AlgebraId& algebra,
                        const std::string& task) {
  if (cfg.has("opt.l2_algebra_scale"))
    return cfg.get_real("opt.l2_algebra_scale", 1.0);
  if (task == "cifar10") {
    switch (algebra.tag()) {
      case AlgebraTag::kQuaternion:
      case AlgebraTag::kM2R:
      case AlgebraTag::kM3R:
      case AlgebraTag::kM4R:
      case AlgebraTag::kM2C:
        return 0.725;
      default:
        return 1.0;
    }
  }
  return 1.0;
}

}  // namespace

TaskInfo task_info(const Config& cfg) {
  TaskInfo info;
  info.task = cfg.get_string("task", "spiral");
  if (info.task == "spiral" || info.task == "blobs") {
    info.features = 2;
    info.classes = static_cast<std::size_t>(cfg.get_int("data.classes", 3));
  } else if (info.task == "cifar10") {
    info.channels = 3;
    info.classes = 10;
    info.image_hw = 24;  // training crops
  } else if (info.task == "text") {
    info.vocab = 256;
    info.seq = static_cast<std::size_t>(cfg.get_int("data.seq_len", 32));
  } else {
    throw std::runtime_error("unknown task: " + info.task);
  }
  return info;
}

RunResult run_training(const Config& cfg, const std::string& out_dir,
                       bool prune_enabled) {
  const TaskInfo info = task_info(cfg);
  TaskData dataset = load_task(cfg, info);
  Model model = Model::build(cfg, info);

  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  Rng data_rng(seed ^ 0xba7c4e5dULL);
  Rng dropout_rng(seed ^ 0xd20b0075ULL);
  const auto steps = static_cast<std::size_t>(cfg.get_int("steps", 2000));
  const auto batch_size = static_cast<std::size_t>(cfg.get_int("batch", 32));
  const auto eval_every =
      static_cast<std::size_t>(cfg.get_int("eval_every", 100));

  Optimizer opt(cfg, model.params(),
                default_l2_scale(cfg, model.algebra(), info.task));

  prune::PruneState pruner;
  if (prune_enabled) {
    pruner.schedule = prune::PruneSchedule::standard(
        steps, cfg.get_real("prune.final_sparsity", 0.9),
        static_cast<std::size_t>(cfg.get_int("prune.interval", 100)));
    pruner.criterion =
        prune::parse_criterion(cfg.get_string("prune.criterion", "frobenius"));
    pruner.scope = cfg.get_string("prune.scope", "global") == "per_layer"
                       ? prune::PruneScope::kPerLayer
                       : prune::PruneScope::kGlobal;
    for (ParamInfo& p : model.params()) {
      if (!p.register_prunable) continue;
      std::string layer = p.name;
      if (layer.size() > 2 && layer.substr(layer.size() - 2) == ".w")
        layer.resize(layer.size() - 2);
      pruner.register_layer(layer, &p.tensor, p.frozen);
    }
  }

  RunResult result;
  result.steps = steps;
  result.metrics_path = out_dir + "/metrics.csv";
  result.checkpoint_path = out_dir + "/checkpoint.algnn";
  std::ofstream metrics(result.metrics_path, std::ios::trunc);
  if (!metrics)
    throw std::runtime_error("cannot write " + result.metrics_path);
  metrics << "step,loss,metric,sparsity\n";
  metrics.precision(17);

  auto make_batch = [&]() {
    if (info.task == "spiral" || info.task == "blobs")
      return dataset.points.minibatch(data_rng, batch_size);
    if (info.task == "cifar10")
      return dataset.cifar_train.augmented_minibatch(data_rng, batch_size);
    return dataset.text.minibatch(data_rng, batch_size, info.seq);
  };

  const bool is_text = info.task == "text";
  double last_loss = 0.0, last_metric = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    const data::Batch batch = make_batch();
    Tape tape;
    std::vector<ValueId> ids;
    Model::Output out = model.forward(tape, batch, true, dropout_rng, &ids);
    last_loss = tape.value(out.loss).values()[0];
    if (!std::isfinite(last_loss)) {
      const std::string rescue = out_dir + "/last_good.algnn";
      save_checkpoint(model.to_checkpoint(cfg.serialize()), rescue);
      throw std::runtime_error("non-finite loss at step " +
                               std::to_string(step) +
                               "; last-good checkpoint written to " + rescue);
    }
    tape.backward(out.loss);
    GradientBundle grads = collect_grads(tape, ids);

    if (prune_enabled) {
      // Masked tuples receive no gradient and no momentum.
      std::size_t li = 0;
      for (std::size_t p = 0; p < model.params().size(); ++p) {
        if (!model.params()[p].register_prunable) continue;
        prune::apply_mask(pruner.layers[li], pruner.component_mode(),
                          grads.grads[p]);
        ++li;
      }
    }

    opt.step(model.params(), grads, step);

    if (prune_enabled) {
      std::size_t li = 0;
      for (std::size_t p = 0; p < model.params().size(); ++p) {
        if (!model.params()[p].register_prunable) continue;
        prune::apply_mask(pruner.layers[li], pruner.component_mode(),
                          model.params()[p].tensor);
        prune::apply_mask(pruner.layers[li], pruner.component_mode(),
                          opt.velocity()[p]);
        ++li;
      }
      if (pruner.schedule.is_boundary(step)) {
        prune_step(pruner, step);
        for (std::size_t p = 0, l = 0; p < model.params().size(); ++p) {
          if (!model.params()[p].register_prunable) continue;
          prune::apply_mask(pruner.layers[l], pruner.component_mode(),
                            opt.velocity()[p]);
          ++l;
        }
      }
    }

    if (step % eval_every == 0 || step + 1 == steps) {
      if (is_text) {
        last_metric = last_loss / std::log(2.0);  // bits per character
      } else {
        last_metric =
            Model::accuracy(tape.value(out.logits), batch.labels);
      }
      const double sparsity = prune_enabled ? pruner.sparsity() : 0.0;
      metrics << step << ',' << last_loss << ',' << last_metric << ','
              << sparsity << '\n';
    }
  }

  // Final evaluation pass.
  Rng eval_rng(seed ^ 0xe7a1ULL);
  if (info.task == "spiral" || info.task == "blobs") {
    const data::Batch full = dataset.points.full();
    Tape tape;
    Model::Output out = model.forward(tape, full, false, eval_rng);
    result.final_metric = Model::accuracy(tape.value(out.logits), full.labels);
    result.final_loss = tape.value(out.loss).values()[0];
  } else if (info.task == "cifar10") {
    const data::Cifar10& eval_set =
        dataset.has_cifar_test ? dataset.cifar_test : dataset.cifar_train;
    std::size_t hits = 0, total = 0;
    const std::size_t chunk = 200;
    for (std::size_t off = 0; off < eval_set.count; off += chunk) {
      const data::Batch b = eval_set.eval_batch(off, chunk);
      Tape tape;
      Model::Output out = model.forward(tape, b, false, eval_rng);
      hits += static_cast<std::size_t>(
          Model::accuracy(tape.value(out.logits), b.labels) *
              static_cast<double>(b.batch) +
          0.5);
      total += b.batch;
    }
    result.final_metric =
        total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
    result.final_loss = last_loss;
  } else {
    double bpc_sum = 0.0;
    const int eval_windows = 20;
    for (int i = 0; i < eval_windows; ++i) {
      const data::Batch b = dataset.text.minibatch(eval_rng, 4, info.seq);
      Tape tape;
      Model::Output out = model.forward(tape, b, false, eval_rng);
      bpc_sum += tape.value(out.loss).values()[0] / std::log(2.0);
    }
    result.final_metric = bpc_sum / eval_windows;
    result.final_loss = last_loss;
  }

  save_checkpoint(model.to_checkpoint(cfg.serialize()), result.checkpoint_path);

  if (prune_enabled) {
    result.mask_path = out_dir + "/checkpoint.mask";
    save_mask(prune::to_mask_file(pruner), result.mask_path);
    result.sparsity_path = out_dir + "/sparsity.csv";
    std::ofstream sparsity_csv(result.sparsity_path, std::ios::trunc);
    write_sparsity_csv(prune::sparsity_report(pruner, model.cost_spec()),
                       sparsity_csv);
    result.final_sparsity = pruner.sparsity();
  }
  return result;
}

}  // namespace algnn::train
