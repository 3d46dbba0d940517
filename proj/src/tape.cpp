#include "algnn/tape.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace algnn {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}
}  // namespace

std::pair<Tuple, Tuple> backward_mul(const StructureTable& table, const Tuple& x,
                                     const Tuple& y, const Tuple& out_adjoint) {
  const std::size_t dim = static_cast<std::size_t>(table.dim);
  require(x.size() == dim && y.size() == dim && out_adjoint.size() == dim,
          "backward_mul: tuple length mismatch");
  Tuple x_adj(dim, 0.0), y_adj(dim, 0.0);
  for (const TableEntry& e : table.entries) {
    x_adj[e.i] += e.sign * out_adjoint[e.k] * y[e.j];
    y_adj[e.j] += e.sign * out_adjoint[e.k] * x[e.i];
  }
  return {std::move(x_adj), std::move(y_adj)};
}

Tuple backward_norm(const Tuple& x, double out_adjoint) {
  Tuple adj(x.size(), 0.0);
  const double norm = tuple_norm(x);
  if (norm == 0.0) return adj;
  for (std::size_t i = 0; i < x.size(); ++i)
    adj[i] = out_adjoint * x[i] / norm;
  return adj;
}

std::string op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kInput: return "input";
    case OpKind::kParam: return "param";
    case OpKind::kLinear: return "linear";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kCompMul: return "comp_mul";
    case OpKind::kTupleMul: return "tuple_mul";
    case OpKind::kAffine: return "affine";
    case OpKind::kActivation: return "activation";
    case OpKind::kBatchNorm: return "batchnorm";
    case OpKind::kTupleGate: return "tuple_gate";
    case OpKind::kLift: return "lift";
    case OpKind::kLogitsReadout: return "logits_readout";
    case OpKind::kFlatAttention: return "flat_attention";
    case OpKind::kDropout: return "dropout";
    case OpKind::kEmbedding: return "embedding";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kSum: return "sum";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "?";
}

ValueId Tape::push(Node node) {
  for (ValueId in : node.inputs) {
    require(in < nodes_.size(), "tape: input id out of range");
    node.requires_grad |= nodes_[in].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

AlgebraTensor& Tape::adjoint_of(ValueId id) {
  Node& n = nodes_[id];
  if (!n.has_adjoint) {
    n.adjoint = zeros_like(n.value);
    n.has_adjoint = true;
  }
  return n.adjoint;
}

void Tape::backward(ValueId loss) {
  require(loss < nodes_.size(), "backward: bad loss id");
  const Node& top = nodes_[loss];
  require(top.value.algebra() == AlgebraId::real() && top.value.size() == 1,
          "backward: loss must be a real scalar");
  adjoint_of(loss).values()[0] = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_adjoint || !n.requires_grad || !n.backprop) continue;
    n.backprop(*this, n);
  }
}

AlgebraTensor Tape::grad(ValueId id) const {
  const Node& n = nodes_[id];
  return n.has_adjoint ? n.adjoint : zeros_like(n.value);
}

std::optional<std::pair<ValueId, std::string>> Tape::first_nonfinite() const {
  for (ValueId i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].value.all_finite())
      return std::make_pair(
          i, op_name(nodes_[i].kind) + "#" + std::to_string(i));
  return std::nullopt;
}

double Tape::min_kink_distance() const {
  double dist = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) {
    if (n.kind == OpKind::kActivation && n.act == nn::Activation::kRelu) {
      for (double v : nodes_[n.inputs[0]].value.values())
        dist = std::min(dist, std::abs(v));
    }
    if (n.kind == OpKind::kTupleGate) {
      const AlgebraTensor& x = nodes_[n.inputs[0]].value;
      const int dim = x.dim();
      for (std::size_t t = 0; t < x.tuple_count(); ++t) {
        double mean = 0.0;
        for (int i = 0; i < dim; ++i) mean += x.tuple(t)[i];
        dist = std::min(dist, std::abs(mean / dim));
      }
    }
  }
  return dist;
}

void Tape::accum_adjoint(ValueId id, const AlgebraTensor& g) {
  if (!nodes_[id].requires_grad) return;
  AlgebraTensor& adj = adjoint_of(id);
  require(adj.size() == g.size(), "tape: adjoint size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) adj.values()[i] += g.values()[i];
}

// ---- leaves -----------------------------------------------------------------

ValueId Tape::input(AlgebraTensor value) {
  Node n;
  n.kind = OpKind::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

ValueId Tape::param(AlgebraTensor value) {
  Node n;
  n.kind = OpKind::kParam;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

// ---- layers -----------------------------------------------------------------

ValueId Tape::linear(ValueId x, ValueId weight, std::optional<ValueId> bias) {
  Node n;
  n.kind = OpKind::kLinear;
  n.inputs = {x, weight};
  if (bias) n.inputs.push_back(*bias);
  n.value = nn::linear_forward(value(x), value(weight),
                               bias ? &value(*bias) : nullptr);
  n.backprop = [](Tape& t, Node& self) {
    const bool has_bias = self.inputs.size() > 2;
    auto g = nn::linear_backward(t.value(self.inputs[0]),
                                 t.value(self.inputs[1]), has_bias,
                                 self.adjoint);
    t.accum_adjoint(self.inputs[0], g.x);
    t.accum_adjoint(self.inputs[1], g.weight);
    if (has_bias) t.accum_adjoint(self.inputs[2], *g.bias);
  };
  return push(std::move(n));
}

ValueId Tape::conv2d(ValueId x, ValueId weight, std::optional<ValueId> bias,
                     int stride, int pad) {
  Node n;
  n.kind = OpKind::kConv2d;
  n.inputs = {x, weight};
  if (bias) n.inputs.push_back(*bias);
  n.value = nn::conv2d_forward(value(x), value(weight),
                               bias ? &value(*bias) : nullptr, stride, pad);
  n.backprop = [stride, pad](Tape& t, Node& self) {
    const bool has_bias = self.inputs.size() > 2;
    auto g = nn::conv2d_backward(t.value(self.inputs[0]),
                                 t.value(self.inputs[1]), has_bias, stride, pad,
                                 self.adjoint);
    t.accum_adjoint(self.inputs[0], g.x);
    t.accum_adjoint(self.inputs[1], g.weight);
    if (has_bias) t.accum_adjoint(self.inputs[2], *g.bias);
  };
  return push(std::move(n));
}

ValueId Tape::add(ValueId x, ValueId y) {
  require(value(x).same_shape(value(y)), "add: shape mismatch");
  Node n;
  n.kind = OpKind::kAdd;
  n.inputs = {x, y};
  n.value = value(x);
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value.values()[i] += value(y).values()[i];
  n.backprop = [](Tape& t, Node& self) {
    t.accum_adjoint(self.inputs[0], self.adjoint);
    t.accum_adjoint(self.inputs[1], self.adjoint);
  };
  return push(std::move(n));
}

ValueId Tape::sub(ValueId x, ValueId y) {
  require(value(x).same_shape(value(y)), "sub: shape mismatch");
  Node n;
  n.kind = OpKind::kSub;
  n.inputs = {x, y};
  n.value = value(x);
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value.values()[i] -= value(y).values()[i];
  n.backprop = [](Tape& t, Node& self) {
    t.accum_adjoint(self.inputs[0], self.adjoint);
    AlgebraTensor neg = self.adjoint;
    for (double& v : neg.values()) v = -v;
    t.accum_adjoint(self.inputs[1], neg);
  };
  return push(std::move(n));
}

ValueId Tape::comp_mul(ValueId x, ValueId y) {
  require(value(x).same_shape(value(y)), "comp_mul: shape mismatch");
  Node n;
  n.kind = OpKind::kCompMul;
  n.inputs = {x, y};
  n.value = value(x);
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value.values()[i] *= value(y).values()[i];
  n.backprop = [](Tape& t, Node& self) {
    const AlgebraTensor& xv = t.value(self.inputs[0]);
    const AlgebraTensor& yv = t.value(self.inputs[1]);
    AlgebraTensor gx = zeros_like(xv);
    AlgebraTensor gy = zeros_like(yv);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      gx.values()[i] = self.adjoint.values()[i] * yv.values()[i];
      gy.values()[i] = self.adjoint.values()[i] * xv.values()[i];
    }
    t.accum_adjoint(self.inputs[0], gx);
    t.accum_adjoint(self.inputs[1], gy);
  };
  return push(std::move(n));
}

ValueId Tape::tuple_mul(ValueId x, ValueId y) {
  require(value(x).same_shape(value(y)), "tuple_mul: shape mismatch");
  const AlgebraId alg = value(x).algebra();
  const StructureTable* table = &structure_table(alg);  // static lifetime
  Node n;
  n.kind = OpKind::kTupleMul;
  n.inputs = {x, y};
  n.value = zeros_like(value(x));
  for (std::size_t t = 0; t < n.value.tuple_count(); ++t)
    mul_accum(*table, value(x).tuple(t), value(y).tuple(t), n.value.tuple(t));
  n.backprop = [table](Tape& t, Node& self) {
    const AlgebraTensor& xv = t.value(self.inputs[0]);
    const AlgebraTensor& yv = t.value(self.inputs[1]);
    AlgebraTensor gx = zeros_like(xv);
    AlgebraTensor gy = zeros_like(yv);
    for (std::size_t i = 0; i < xv.tuple_count(); ++i) {
      for (const TableEntry& e : table->entries) {
        gx.tuple(i)[e.i] +=
            e.sign * self.adjoint.tuple(i)[e.k] * yv.tuple(i)[e.j];
        gy.tuple(i)[e.j] +=
            e.sign * self.adjoint.tuple(i)[e.k] * xv.tuple(i)[e.i];
      }
    }
    t.accum_adjoint(self.inputs[0], gx);
    t.accum_adjoint(self.inputs[1], gy);
  };
  return push(std::move(n));
}

ValueId Tape::affine(ValueId x, double a, double b) {
  Node n;
  n.kind = OpKind::kAffine;
  n.inputs = {x};
  n.value = value(x);
  for (double& v : n.value.values()) v = a * v + b;
  n.backprop = [a](Tape& t, Node& self) {
    AlgebraTensor g = self.adjoint;
    for (double& v : g.values()) v *= a;
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::activation(ValueId x, nn::Activation kind) {
  Node n;
  n.kind = OpKind::kActivation;
  n.act = kind;
  n.inputs = {x};
  n.value = nn::activation_forward(value(x), kind);
  n.backprop = [kind](Tape& t, Node& self) {
    t.accum_adjoint(self.inputs[0],
                    nn::activation_backward(t.value(self.inputs[0]), kind,
                                            self.adjoint));
  };
  return push(std::move(n));
}

ValueId Tape::batchnorm(ValueId x, ValueId gamma, ValueId beta,
                        nn::BatchNormState& state, bool training) {
  Node n;
  n.kind = OpKind::kBatchNorm;
  n.inputs = {x, gamma, beta};
  auto cache = std::make_shared<nn::BatchNormCache>();
  n.value = nn::batchnorm_forward(value(x), value(gamma), value(beta), state,
                                  training, cache.get());
  n.backprop = [cache](Tape& t, Node& self) {
    auto g = nn::batchnorm_backward(t.value(self.inputs[0]),
                                    t.value(self.inputs[1]), *cache,
                                    self.adjoint);
    t.accum_adjoint(self.inputs[0], g.x);
    t.accum_adjoint(self.inputs[1], g.gamma);
    t.accum_adjoint(self.inputs[2], g.beta);
  };
  return push(std::move(n));
}

ValueId Tape::tuple_gate(ValueId x) {
  Node n;
  n.kind = OpKind::kTupleGate;
  n.inputs = {x};
  auto r = std::make_shared<nn::TupleGateResult>(nn::tuple_gate_forward(value(x)));
  n.value = r->out;
  gate_zero_fraction_ = r->zero_fraction;
  n.backprop = [r](Tape& t, Node& self) {
    AlgebraTensor g = self.adjoint;
    const int dim = g.dim();
    for (std::size_t i = 0; i < g.tuple_count(); ++i)
      if (!r->keep[i])
        for (int c = 0; c < dim; ++c) g.tuple(i)[c] = 0.0;
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::lift(ValueId x_real, const nn::LiftParams& shape,
                   std::span<const ValueId> param_ids) {
  nn::LiftParams p;
  p.algebra = shape.algebra;
  p.mlp = shape.mlp;
  const bool trivial = shape.algebra.dim() == 1;
  if (!trivial) {
    if (!p.mlp) {
      require(param_ids.size() == 1, "lift: affine mode expects 1 param");
      p.affine = value(param_ids[0]);
    } else {
      require(param_ids.size() == 4, "lift: mlp mode expects 4 params");
      p.mlp_w1 = value(param_ids[0]);
      p.mlp_b1 = value(param_ids[1]);
      p.mlp_w2 = value(param_ids[2]);
      p.mlp_b2 = value(param_ids[3]);
    }
  }
  Node n;
  n.kind = OpKind::kLift;
  n.inputs = {x_real};
  for (ValueId id : param_ids) n.inputs.push_back(id);
  n.value = nn::lift_forward(value(x_real), p);
  n.backprop = [p](Tape& t, Node& self) {
    auto g = nn::lift_backward(t.value(self.inputs[0]), p, self.adjoint);
    t.accum_adjoint(self.inputs[0], g.x);
    if (p.algebra.dim() == 1) return;
    if (!p.mlp) {
      t.accum_adjoint(self.inputs[1], g.affine);
    } else {
      t.accum_adjoint(self.inputs[1], g.mlp_w1);
      t.accum_adjoint(self.inputs[2], g.mlp_b1);
      t.accum_adjoint(self.inputs[3], g.mlp_w2);
      t.accum_adjoint(self.inputs[4], g.mlp_b2);
    }
  };
  return push(std::move(n));
}

ValueId Tape::logits_readout(ValueId x) {
  Node n;
  n.kind = OpKind::kLogitsReadout;
  n.inputs = {x};
  n.value = nn::logits_readout_forward(value(x));
  n.backprop = [](Tape& t, Node& self) {
    t.accum_adjoint(self.inputs[0],
                    nn::logits_readout_backward(t.value(self.inputs[0]),
                                                self.adjoint));
  };
  return push(std::move(n));
}

ValueId Tape::flat_attention(ValueId k, ValueId q) {
  Node n;
  n.kind = OpKind::kFlatAttention;
  n.inputs = {k, q};
  n.value = nn::flat_attention_score(value(k), value(q));
  n.backprop = [](Tape& t, Node& self) {
    auto [gk, gq] = nn::flat_attention_backward(
        t.value(self.inputs[0]), t.value(self.inputs[1]), self.adjoint);
    t.accum_adjoint(self.inputs[0], gk);
    t.accum_adjoint(self.inputs[1], gq);
  };
  return push(std::move(n));
}

ValueId Tape::dropout(ValueId x, double rate, Rng& rng, bool training) {
  require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
  Node n;
  n.kind = OpKind::kDropout;
  n.inputs = {x};
  n.value = value(x);
  if (!training || rate == 0.0) {
    n.backprop = [](Tape& t, Node& self) {
      t.accum_adjoint(self.inputs[0], self.adjoint);
    };
    return push(std::move(n));
  }
  const double scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<char>>(n.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    const bool keep = !rng.bernoulli(rate);
    (*mask)[i] = keep;
    n.value.values()[i] = keep ? n.value.values()[i] * scale : 0.0;
  }
  n.backprop = [mask, scale](Tape& t, Node& self) {
    AlgebraTensor g = self.adjoint;
    for (std::size_t i = 0; i < g.size(); ++i)
      g.values()[i] = (*mask)[i] ? g.values()[i] * scale : 0.0;
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::embedding(ValueId table, std::vector<int> indices) {
  const AlgebraTensor& tab = value(table);
  require(tab.rank() == 2, "embedding: table must be [vocab, width]");
  const std::size_t vocab = tab.extent(0);
  const std::size_t width = tab.extent(1);
  const int dim = tab.dim();
  for (int idx : indices)
    require(idx >= 0 && static_cast<std::size_t>(idx) < vocab,
            "embedding: index out of range");
  Node n;
  n.kind = OpKind::kEmbedding;
  n.inputs = {table};
  n.value = AlgebraTensor(tab.algebra(), {indices.size(), width});
  const std::size_t row = width * dim;
  for (std::size_t b = 0; b < indices.size(); ++b)
    std::copy(tab.data() + indices[b] * row, tab.data() + (indices[b] + 1) * row,
              n.value.data() + b * row);
  auto idx = std::make_shared<std::vector<int>>(std::move(indices));
  n.backprop = [idx, row](Tape& t, Node& self) {
    AlgebraTensor g = zeros_like(t.value(self.inputs[0]));
    for (std::size_t b = 0; b < idx->size(); ++b) {
      const double* src = self.adjoint.data() + b * row;
      double* dst = g.data() + (*idx)[b] * row;
      for (std::size_t i = 0; i < row; ++i) dst[i] += src[i];
    }
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::global_avg_pool(ValueId x) {
  const AlgebraTensor& xv = value(x);
  require(xv.rank() == 4, "global_avg_pool: input must be [b, h, w, c]");
  const std::size_t batch = xv.extent(0);
  const std::size_t spatial = xv.extent(1) * xv.extent(2);
  const std::size_t channels = xv.extent(3);
  const int dim = xv.dim();
  const std::size_t slice = channels * dim;
  Node n;
  n.kind = OpKind::kGlobalAvgPool;
  n.inputs = {x};
  n.value = AlgebraTensor(xv.algebra(), {batch, channels});
  for (std::size_t b = 0; b < batch; ++b) {
    double* out = n.value.data() + b * slice;
    for (std::size_t s = 0; s < spatial; ++s) {
      const double* in = xv.data() + (b * spatial + s) * slice;
      for (std::size_t i = 0; i < slice; ++i) out[i] += in[i];
    }
    for (std::size_t i = 0; i < slice; ++i) out[i] /= spatial;
  }
  n.backprop = [batch, spatial, slice](Tape& t, Node& self) {
    AlgebraTensor g = zeros_like(t.value(self.inputs[0]));
    for (std::size_t b = 0; b < batch; ++b) {
      const double* adj = self.adjoint.data() + b * slice;
      for (std::size_t s = 0; s < spatial; ++s) {
        double* out = g.data() + (b * spatial + s) * slice;
        for (std::size_t i = 0; i < slice; ++i) out[i] = adj[i] / spatial;
      }
    }
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::sum(ValueId x) {
  Node n;
  n.kind = OpKind::kSum;
  n.inputs = {x};
  double acc = 0.0;
  for (double v : value(x).values()) acc += v;
  n.value = AlgebraTensor::real_scalar(acc);
  n.backprop = [](Tape& t, Node& self) {
    const double a = self.adjoint.values()[0];
    AlgebraTensor g = zeros_like(t.value(self.inputs[0]));
    for (double& v : g.values()) v = a;
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::softmax_cross_entropy(ValueId logits, std::vector<int> labels) {
  const AlgebraTensor& lg = value(logits);
  require(lg.algebra() == AlgebraId::real() && lg.rank() == 2,
          "softmax_ce: logits must be a real [batch, classes] tensor");
  const std::size_t batch = lg.extent(0);
  const std::size_t classes = lg.extent(1);
  require(labels.size() == batch, "softmax_ce: one label per batch row");
  for (int y : labels)
    require(y >= 0 && static_cast<std::size_t>(y) < classes,
            "softmax_ce: label out of range");

  auto probs = std::make_shared<AlgebraTensor>(lg);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    double* row = probs->data() + b * classes;
    double max = row[0];
    for (std::size_t c = 1; c < classes; ++c) max = std::max(max, row[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      row[c] = std::exp(row[c] - max);
      z += row[c];
    }
    for (std::size_t c = 0; c < classes; ++c) row[c] /= z;
    loss -= std::log(std::max(row[labels[b]], 1e-300));
  }
  loss /= static_cast<double>(batch);

  Node n;
  n.kind = OpKind::kSoftmaxCrossEntropy;
  n.inputs = {logits};
  n.value = AlgebraTensor::real_scalar(loss);
  auto lbl = std::make_shared<std::vector<int>>(std::move(labels));
  n.backprop = [probs, lbl, batch, classes](Tape& t, Node& self) {
    const double a = self.adjoint.values()[0] / static_cast<double>(batch);
    AlgebraTensor g = *probs;
    for (std::size_t b = 0; b < batch; ++b) {
      double* row = g.data() + b * classes;
      row[(*lbl)[b]] -= 1.0;
      for (std::size_t c = 0; c < classes; ++c) row[c] *= a;
    }
    t.accum_adjoint(self.inputs[0], g);
  };
  return push(std::move(n));
}

ValueId Tape::gru_cell(ValueId x, ValueId h_prev,
                       std::span<const ValueId> param_ids) {
  // Canonical parameter order:
  //   wx_update, wh_update, b_update,
  //   wx_reset,  wh_reset,  b_reset,
  //   wx_cand,   wh_cand,   b_cand
  require(param_ids.size() == 9, "gru_cell: expects 9 parameter ids");
  const ValueId wxz = param_ids[0], whz = param_ids[1], bz = param_ids[2];
  const ValueId wxr = param_ids[3], whr = param_ids[4], br = param_ids[5];
  const ValueId wxn = param_ids[6], whn = param_ids[7], bn = param_ids[8];

  const ValueId z = activation(add(linear(x, wxz, bz), linear(h_prev, whz)),
                               nn::Activation::kSigmoid);
  const ValueId r = activation(add(linear(x, wxr, br), linear(h_prev, whr)),
                               nn::Activation::kSigmoid);
  const ValueId rh = comp_mul(r, h_prev);
  const ValueId cand = activation(add(linear(x, wxn, bn), linear(rh, whn)),
                                  nn::Activation::kTanh);
  // h' = z (.) h_prev + (1 - z) (.) cand
  return add(comp_mul(z, h_prev), comp_mul(affine(z, -1.0, 1.0), cand));
}

GradientBundle collect_grads(const Tape& tape, std::span<const ValueId> params) {
  GradientBundle b;
  b.params.assign(params.begin(), params.end());
  b.grads.reserve(params.size());
  for (ValueId id : params) b.grads.push_back(tape.grad(id));
  return b;
}

std::vector<ValueId> register_gru_params(Tape& tape, const nn::GruParams& p) {
  return {tape.param(p.wx_update.weight), tape.param(p.wh_update.weight),
          tape.param(p.b_update),         tape.param(p.wx_reset.weight),
          tape.param(p.wh_reset.weight),  tape.param(p.b_reset),
          tape.param(p.wx_cand.weight),   tape.param(p.wh_cand.weight),
          tape.param(p.b_cand)};
}

AlgebraTensor gru_forward(const AlgebraTensor& x, const AlgebraTensor& h_prev,
                          const nn::GruParams& p) {
  Tape tape;
  const ValueId xi = tape.input(x);
  const ValueId hi = tape.input(h_prev);
  const std::vector<ValueId> ids = {
      tape.input(p.wx_update.weight), tape.input(p.wh_update.weight),
      tape.input(p.b_update),         tape.input(p.wx_reset.weight),
      tape.input(p.wh_reset.weight),  tape.input(p.b_reset),
      tape.input(p.wx_cand.weight),   tape.input(p.wh_cand.weight),
      tape.input(p.b_cand)};
  return tape.value(tape.gru_cell(xi, hi, ids));
}

}  // namespace algnn
