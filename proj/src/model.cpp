#include "algnn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace algnn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::size_t Model::add_param(const std::string& name, AlgebraTensor tensor,
                             bool prunable, bool frozen) {
  ParamInfo info;
  info.name = name;
  info.tensor = std::move(tensor);
  info.register_prunable = prunable;
  info.frozen = frozen;
  params_.push_back(std::move(info));
  by_name_[name] = params_.size() - 1;
  return params_.size() - 1;
}

Model Model::build(const Config& cfg, const TaskInfo& info) {
  Model m;
  m.info_ = info;
  m.algebra_ = AlgebraId::parse(cfg.get_string("algebra", "real"));
  if (m.algebra_.tag() == AlgebraTag::kDiagonal)
    m.algebra_ = AlgebraId::diagonal(
        static_cast<int>(cfg.get_int("diag_n", m.algebra_.dim())));
  m.type_ = cfg.get_string("model.type", info.task == "text" ? "gru" : "mlp");
  m.act_ = nn::parse_activation(cfg.get_string("model.activation", "relu"));
  m.bias_ = cfg.get_bool("model.bias", true);
  m.batchnorm_ = cfg.get_bool("model.batchnorm", m.type_ == "conv");
  m.dropout_ = cfg.get_real("model.dropout", 0.0);
  for (std::int64_t h : cfg.get_int_list("model.hidden"))
    m.hidden_.push_back(static_cast<std::size_t>(h));
  if (m.hidden_.empty()) m.hidden_ = {16, 16};
  m.embed_ = static_cast<std::size_t>(cfg.get_int("model.embed", 16));
  m.gru_hidden_ = static_cast<std::size_t>(cfg.get_int("model.gru_hidden", 32));

  Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed", 1)) * 0x9e3779b9ULL +
          1);
  const int dim = m.algebra_.dim();

  // Input lift (identity for the real algebra).
  const auto lift_hidden =
      static_cast<std::size_t>(cfg.get_int("model.lift_hidden", 0));
  if (lift_hidden > 0)
    m.lift_shape_ = nn::LiftParams::mlp_lift(m.algebra_, lift_hidden, rng);
  else
    m.lift_shape_ = nn::LiftParams::affine_lift(m.algebra_);
  if (dim > 1) {
    if (m.lift_shape_.mlp) {
      m.lift_param_indices_ = {
          m.add_param("lift.w1", m.lift_shape_.mlp_w1, false, false),
          m.add_param("lift.b1", m.lift_shape_.mlp_b1, false, false),
          m.add_param("lift.w2", m.lift_shape_.mlp_w2, false, false),
          m.add_param("lift.b2", m.lift_shape_.mlp_b2, false, false)};
    } else {
      m.lift_param_indices_ = {
          m.add_param("lift.affine", m.lift_shape_.affine, false, false)};
    }
  }

  auto add_linear = [&](const std::string& name, std::size_t in,
                        std::size_t out, bool bias, bool prunable,
                        bool frozen) {
    nn::LinearParams p = nn::make_linear(m.algebra_, in, out, bias, rng);
    m.add_param(name + ".w", p.weight, prunable, frozen);
    if (bias) m.add_param(name + ".b", *p.bias, false, false);
    cost::LayerSpec spec;
    spec.name = name;
    spec.kind = cost::LayerKind::kLinear;
    spec.algebra = m.algebra_;
    spec.tuples_in = in;
    spec.tuples_out = out;
    spec.bias = bias;
    m.spec_.layers.push_back(spec);
  };

  auto add_bn = [&](const std::string& name, std::size_t channels,
                    std::size_t positions) {
    AlgebraTensor gamma(m.algebra_, {channels});
    gamma.fill(1.0);
    AlgebraTensor beta(m.algebra_, {channels});
    m.add_param(name + ".gamma", gamma, false, false);
    m.add_param(name + ".beta", beta, false, false);
    m.bn_states_.push_back(nn::BatchNormState::make(m.algebra_, channels));
    cost::LayerSpec spec;
    spec.name = name;
    spec.kind = cost::LayerKind::kBatchNorm;
    spec.algebra = m.algebra_;
    spec.tuples_in = channels;
    spec.tuples_out = channels;
    spec.out_positions = positions;
    m.spec_.layers.push_back(spec);
  };

  auto add_activation_row = [&](const std::string& name, std::size_t channels,
                                std::size_t positions) {
    cost::LayerSpec spec;
    spec.name = name;
    spec.kind = cost::LayerKind::kActivation;
    spec.algebra = m.algebra_;
    spec.tuples_in = channels;
    spec.tuples_out = channels;
    spec.out_positions = positions;
    m.spec_.layers.push_back(spec);
  };

  auto add_lift_row = [&](std::size_t elements, std::size_t channels) {
    if (dim == 1) return;
    cost::LayerSpec spec;
    spec.name = "lift";
    spec.kind = cost::LayerKind::kLift;
    spec.algebra = m.algebra_;
    spec.tuples_in = channels;
    spec.tuples_out = channels;
    spec.out_positions = elements;
    m.spec_.layers.push_back(spec);
  };

  if (m.type_ == "mlp") {
    require(info.features > 0 && info.classes > 0,
            "mlp model needs a classification task");
    add_lift_row(info.features, info.features);
    std::size_t prev = info.features;
    for (std::size_t i = 0; i < m.hidden_.size(); ++i) {
      const std::string name = "fc" + std::to_string(i);
      add_linear(name, prev, m.hidden_[i], m.bias_, true, false);
      if (m.batchnorm_) add_bn("bn" + std::to_string(i), m.hidden_[i], 1);
      add_activation_row("act" + std::to_string(i), m.hidden_[i], 1);
      prev = m.hidden_[i];
    }
    // Final linear stays dense under pruning.
    add_linear("out", prev, info.classes, m.bias_, true, true);
  } else if (m.type_ == "conv") {
    require(info.channels > 0 && info.classes > 0 && info.image_hw > 0,
            "conv model needs an image task");
    const std::size_t hw = info.image_hw;
    add_lift_row(hw * hw * info.channels, info.channels);
    std::size_t prev = info.channels;
    std::size_t cur_hw = hw;
    for (std::size_t i = 0; i < m.hidden_.size(); ++i) {
      const std::string name = "conv" + std::to_string(i);
      const int stride = i == 0 ? 1 : 2;
      nn::Conv2dParams p =
          nn::make_conv2d(m.algebra_, prev, m.hidden_[i], 3, stride, 1,
                          m.bias_, rng);
      // The initial convolution is tracked but never pruned.
      m.add_param(name + ".w", p.weight, true, i == 0);
      if (m.bias_) m.add_param(name + ".b", *p.bias, false, false);
      cur_hw = (cur_hw + 2 * 1 - 3) / stride + 1;
      cost::LayerSpec spec;
      spec.name = name;
      spec.kind = cost::LayerKind::kConv2d;
      spec.algebra = m.algebra_;
      spec.tuples_in = prev;
      spec.tuples_out = m.hidden_[i];
      spec.kh = spec.kw = 3;
      spec.out_positions = cur_hw * cur_hw;
      spec.bias = m.bias_;
      m.spec_.layers.push_back(spec);
      if (m.batchnorm_)
        add_bn("bn" + std::to_string(i), m.hidden_[i], cur_hw * cur_hw);
      add_activation_row("act" + std::to_string(i), m.hidden_[i],
                         cur_hw * cur_hw);
      prev = m.hidden_[i];
    }
    add_linear("out", prev, info.classes, m.bias_, true, true);
  } else if (m.type_ == "gru") {
    require(info.vocab > 0, "gru model needs the text task");
    // Embedding carries the input initialization and stays dense.
    AlgebraTensor table(m.algebra_, {info.vocab, m.embed_});
    nn::glorot_init(table, info.vocab, m.embed_, rng);
    m.add_param("embed.w", table, true, true);
    {
      cost::LayerSpec spec;
      spec.name = "embed";
      spec.kind = cost::LayerKind::kEmbedding;
      spec.algebra = m.algebra_;
      spec.tuples_in = info.vocab;
      spec.tuples_out = m.embed_;
      m.spec_.layers.push_back(spec);
    }
    nn::GruParams g = nn::make_gru(m.algebra_, m.embed_, m.gru_hidden_, rng);
    const auto add_gate = [&](const std::string& name,
                              const nn::LinearParams& lin, std::size_t in) {
      m.add_param(name, lin.weight, true, false);
      cost::LayerSpec spec;
      spec.name = name;
      spec.kind = cost::LayerKind::kLinear;
      spec.algebra = m.algebra_;
      spec.tuples_in = in;
      spec.tuples_out = m.gru_hidden_;
      m.spec_.layers.push_back(spec);
    };
    add_gate("gru.wx_z", g.wx_update, m.embed_);
    add_gate("gru.wh_z", g.wh_update, m.gru_hidden_);
    m.add_param("gru.b_z", g.b_update, false, false);
    add_gate("gru.wx_r", g.wx_reset, m.embed_);
    add_gate("gru.wh_r", g.wh_reset, m.gru_hidden_);
    m.add_param("gru.b_r", g.b_reset, false, false);
    add_gate("gru.wx_n", g.wx_cand, m.embed_);
    add_gate("gru.wh_n", g.wh_cand, m.gru_hidden_);
    m.add_param("gru.b_n", g.b_cand, false, false);
    add_linear("out", m.gru_hidden_, info.vocab, m.bias_, true, true);
  } else {
    throw std::invalid_argument("unknown model.type: " + m.type_);
  }
  return m;
}

ValueId Model::lift_real_input(Tape& tape, ValueId x,
                               const std::vector<ValueId>& ids) const {
  std::vector<ValueId> lift_ids;
  for (std::size_t idx : lift_param_indices_) lift_ids.push_back(ids[idx]);
  return tape.lift(x, lift_shape_, lift_ids);
}

Model::Output Model::forward(Tape& tape, const data::Batch& batch,
                             bool training, Rng& dropout_rng,
                             std::vector<ValueId>* param_ids) {
  std::vector<ValueId> ids;
  ids.reserve(params_.size());
  for (const ParamInfo& p : params_) ids.push_back(tape.param(p.tensor));
  if (param_ids) *param_ids = ids;
  auto id_of = [&](const std::string& name) {
    auto it = by_name_.find(name);
    require(it != by_name_.end(), "missing parameter " + name);
    return ids[it->second];
  };
  auto maybe_bias = [&](const std::string& name) {
    return bias_ ? std::optional<ValueId>(id_of(name)) : std::nullopt;
  };

  Output out;
  if (type_ == "mlp") {
    ValueId h = lift_real_input(tape, tape.input(batch.x), ids);
    std::size_t bn_index = 0;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      const std::string name = "fc" + std::to_string(i);
      h = tape.linear(h, id_of(name + ".w"), maybe_bias(name + ".b"));
      if (batchnorm_) {
        const std::string bn = "bn" + std::to_string(i);
        h = tape.batchnorm(h, id_of(bn + ".gamma"), id_of(bn + ".beta"),
                           bn_states_[bn_index++], training);
      }
      h = tape.activation(h, act_);
      if (dropout_ > 0.0) h = tape.dropout(h, dropout_, dropout_rng, training);
    }
    h = tape.linear(h, id_of("out.w"), maybe_bias("out.b"));
    out.logits = tape.logits_readout(h);
    out.loss = tape.softmax_cross_entropy(out.logits, batch.labels);
  } else if (type_ == "conv") {
    ValueId h = lift_real_input(tape, tape.input(batch.x), ids);
    std::size_t bn_index = 0;
    for (std::size_t i = 0; i < hidden_.size(); ++i) {
      const std::string name = "conv" + std::to_string(i);
      const int stride = i == 0 ? 1 : 2;
      h = tape.conv2d(h, id_of(name + ".w"), maybe_bias(name + ".b"), stride,
                      1);
      if (batchnorm_) {
        const std::string bn = "bn" + std::to_string(i);
        h = tape.batchnorm(h, id_of(bn + ".gamma"), id_of(bn + ".beta"),
                           bn_states_[bn_index++], training);
      }
      h = tape.activation(h, act_);
    }
    h = tape.global_avg_pool(h);
    h = tape.linear(h, id_of("out.w"), maybe_bias("out.b"));
    out.logits = tape.logits_readout(h);
    out.loss = tape.softmax_cross_entropy(out.logits, batch.labels);
  } else {  // gru
    const std::size_t batch_n = batch.batch;
    const std::size_t seq = batch.seq;
    require(seq > 0, "gru forward needs a token batch");
    const std::vector<ValueId> gru_ids = {
        id_of("gru.wx_z"), id_of("gru.wh_z"), id_of("gru.b_z"),
        id_of("gru.wx_r"), id_of("gru.wh_r"), id_of("gru.b_r"),
        id_of("gru.wx_n"), id_of("gru.wh_n"), id_of("gru.b_n")};
    ValueId h = tape.input(AlgebraTensor(algebra_, {batch_n, gru_hidden_}));
    ValueId total = tape.input(AlgebraTensor::real_scalar(0.0));
    ValueId last_logits = 0;
    for (std::size_t t = 0; t < seq; ++t) {
      std::vector<int> col(batch_n), next(batch_n);
      for (std::size_t b = 0; b < batch_n; ++b) {
        col[b] = batch.tokens[b * seq + t];
        next[b] = batch.labels[b * seq + t];
      }
      const ValueId x = tape.embedding(id_of("embed.w"), col);
      h = tape.gru_cell(x, h, gru_ids);
      ValueId readout = tape.linear(h, id_of("out.w"), maybe_bias("out.b"));
      if (dropout_ > 0.0)
        readout = tape.dropout(readout, dropout_, dropout_rng, training);
      last_logits = tape.logits_readout(readout);
      total = tape.add(total, tape.softmax_cross_entropy(last_logits, next));
    }
    out.loss = tape.affine(total, 1.0 / static_cast<double>(seq), 0.0);
    out.logits = last_logits;
  }
  return out;
}

double Model::accuracy(const AlgebraTensor& logits,
                       const std::vector<int>& labels) {
  const std::size_t batch = logits.extent(0);
  const std::size_t classes = logits.extent(1);
  std::size_t hits = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = logits.data() + b * classes;
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (row[c] > row[best]) best = c;
    hits += static_cast<int>(best) == labels[b];
  }
  return batch ? static_cast<double>(hits) / static_cast<double>(batch) : 0.0;
}

Checkpoint Model::to_checkpoint(const std::string& config_text) const {
  Checkpoint ckpt;
  ckpt.algebra = algebra_;
  ckpt.config_text = config_text;
  for (const ParamInfo& p : params_) ckpt.entries.push_back({p.name, p.tensor});
  return ckpt;
}

void Model::load_params(const Checkpoint& ckpt) {
  for (ParamInfo& p : params_) {
    const AlgebraTensor* t = ckpt.find(p.name);
    require(t != nullptr, "checkpoint missing parameter " + p.name);
    require(t->same_shape(p.tensor),
            "checkpoint shape mismatch for " + p.name);
    p.tensor = *t;
  }
}

}  // namespace algnn
