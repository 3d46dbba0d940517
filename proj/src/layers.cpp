#include "algnn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "algnn/kernels.hpp"
#include "algnn/tuple_ops.hpp"

namespace algnn::nn {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "swish") return Activation::kSwish;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSwish: return "swish";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

double activation_value(Activation kind, double v) {
  switch (kind) {
    case Activation::kRelu: return v > 0.0 ? v : 0.0;
    case Activation::kSwish: return v * sigmoid(v);
    case Activation::kTanh: return std::tanh(v);
    case Activation::kSigmoid: return sigmoid(v);
  }
  return 0.0;
}

double activation_derivative(Activation kind, double v) {
  switch (kind) {
    case Activation::kRelu: return v > 0.0 ? 1.0 : 0.0;
    case Activation::kSwish: {
      const double s = sigmoid(v);
      return s + v * s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(v);
      return 1.0 - t * t;
    }
    case Activation::kSigmoid: {
      const double s = sigmoid(v);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

// ---- initialization ---------------------------------------------------------

void glorot_init(AlgebraTensor& weight, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : weight.values()) v = rng.uniform(-limit, limit);
}

std::pair<std::size_t, std::size_t> weight_fans(const AlgebraTensor& weight) {
  require(weight.rank() >= 2, "weight_fans: weight rank must be >= 2");
  std::size_t kernel = 1;
  for (std::size_t i = 2; i < weight.rank(); ++i) kernel *= weight.extent(i);
  return {weight.extent(1) * kernel, weight.extent(0) * kernel};
}

LinearParams make_linear(const AlgebraId& algebra, std::size_t in,
                         std::size_t out, bool bias, Rng& rng) {
  LinearParams p;
  p.weight = AlgebraTensor(algebra, {out, in});
  glorot_init(p.weight, in, out, rng);
  if (bias) p.bias = AlgebraTensor(algebra, {out});
  return p;
}

Conv2dParams make_conv2d(const AlgebraId& algebra, std::size_t in,
                         std::size_t out, int k, int stride, int pad, bool bias,
                         Rng& rng) {
  Conv2dParams p;
  p.weight = AlgebraTensor(algebra, {out, in, static_cast<std::size_t>(k),
                                     static_cast<std::size_t>(k)});
  const auto [fin, fout] = weight_fans(p.weight);
  glorot_init(p.weight, fin, fout, rng);
  if (bias) p.bias = AlgebraTensor(algebra, {out});
  p.stride = stride;
  p.pad = pad;
  return p;
}

GruParams make_gru(const AlgebraId& algebra, std::size_t in, std::size_t hidden,
                   Rng& rng) {
  GruParams p;
  p.wx_update = make_linear(algebra, in, hidden, false, rng);
  p.wh_update = make_linear(algebra, hidden, hidden, false, rng);
  p.wx_reset = make_linear(algebra, in, hidden, false, rng);
  p.wh_reset = make_linear(algebra, hidden, hidden, false, rng);
  p.wx_cand = make_linear(algebra, in, hidden, false, rng);
  p.wh_cand = make_linear(algebra, hidden, hidden, false, rng);
  p.b_update = AlgebraTensor(algebra, {hidden});
  p.b_reset = AlgebraTensor(algebra, {hidden});
  p.b_cand = AlgebraTensor(algebra, {hidden});
  return p;
}

BatchNormState BatchNormState::make(const AlgebraId& algebra,
                                    std::size_t channels) {
  BatchNormState s;
  s.running_mean.assign(channels * algebra.dim(), 0.0);
  s.running_var.assign(channels * algebra.dim(), 1.0);
  return s;
}

LiftParams LiftParams::affine_lift(const AlgebraId& algebra) {
  LiftParams p;
  p.algebra = algebra;
  const std::size_t extra = algebra.dim() - 1;
  if (extra > 0) {
    p.affine = AlgebraTensor(AlgebraId::real(), {extra, 2});
    // Scale 1, shift 0: extra components start as copies of the input.
    for (std::size_t k = 0; k < extra; ++k) p.affine.values()[2 * k] = 1.0;
  }
  return p;
}

LiftParams LiftParams::mlp_lift(const AlgebraId& algebra, std::size_t hidden,
                                Rng& rng) {
  LiftParams p;
  p.algebra = algebra;
  p.mlp = true;
  const std::size_t extra = algebra.dim() - 1;
  p.mlp_w1 = AlgebraTensor(AlgebraId::real(), {hidden});
  p.mlp_b1 = AlgebraTensor(AlgebraId::real(), {hidden});
  p.mlp_w2 = AlgebraTensor(AlgebraId::real(), {extra, hidden});
  p.mlp_b2 = AlgebraTensor(AlgebraId::real(), {extra});
  glorot_init(p.mlp_w1, 1, hidden, rng);
  if (extra > 0) glorot_init(p.mlp_w2, hidden, extra, rng);
  return p;
}

// ---- linear -----------------------------------------------------------------

AlgebraTensor linear_forward(const AlgebraTensor& x, const AlgebraTensor& weight,
                             const AlgebraTensor* bias) {
  require(x.rank() == 2, "linear: input must be [batch, channels]");
  require(x.algebra() == weight.algebra(), "linear: algebra mismatch");
  require(weight.rank() == 2, "linear: weight must be [out, in]");
  const std::size_t batch = x.extent(0);
  const std::size_t c_in = x.extent(1);
  const std::size_t c_out = weight.extent(0);
  require(weight.extent(1) == c_in, "linear: channel mismatch");
  if (bias)
    require(bias->rank() == 1 && bias->extent(0) == c_out &&
                bias->algebra() == x.algebra(),
            "linear: bias shape mismatch");

  const AlgebraId& alg = x.algebra();
  const int dim = alg.dim();
  AlgebraTensor out(alg, {batch, c_out});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double* acc = out.tuple(b * c_out + o);
      if (bias) {
        const double* bv = bias->tuple(o);
        for (int i = 0; i < dim; ++i) acc[i] = bv[i];
      }
      kernels::contract(alg, weight.tuple(o * c_in), dim, x.tuple(b * c_in),
                        dim, acc, c_in);
    }
  }
  return out;
}

LinearGrads linear_backward(const AlgebraTensor& x, const AlgebraTensor& weight,
                            bool has_bias, const AlgebraTensor& out_adj) {
  const std::size_t batch = x.extent(0);
  const std::size_t c_in = x.extent(1);
  const std::size_t c_out = weight.extent(0);
  require(out_adj.rank() == 2 && out_adj.extent(0) == batch &&
              out_adj.extent(1) == c_out,
          "linear_backward: adjoint shape mismatch");
  const AlgebraId& alg = x.algebra();
  const int dim = alg.dim();
  const StructureTable& right = adjoint_right_table(alg);
  const StructureTable& left = adjoint_left_table(alg);

  LinearGrads g;
  g.x = zeros_like(x);
  g.weight = zeros_like(weight);
  if (has_bias) g.bias = AlgebraTensor(alg, {c_out});

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < c_out; ++o) {
      const double* adj = out_adj.tuple(b * c_out + o);
      for (std::size_t c = 0; c < c_in; ++c) {
        mul_accum(right, weight.tuple(o * c_in + c), adj,
                  g.x.tuple(b * c_in + c));
        mul_accum(left, x.tuple(b * c_in + c), adj,
                  g.weight.tuple(o * c_in + c));
      }
      if (g.bias) {
        double* bias_adj = g.bias->tuple(o);
        for (int i = 0; i < dim; ++i) bias_adj[i] += adj[i];
      }
    }
  }
  return g;
}

// ---- conv2d -----------------------------------------------------------------

namespace {

struct ConvDims {
  std::size_t batch, h, w, c_in, c_out, kh, kw, h_out, w_out;
  int stride, pad;
};

ConvDims conv_dims(const AlgebraTensor& x, const AlgebraTensor& weight,
                   const AlgebraTensor* bias, int stride, int pad) {
  require(x.rank() == 4, "conv2d: input must be [batch, h, w, channels]");
  require(weight.rank() == 4, "conv2d: weight must be [out, in, kh, kw]");
  require(x.algebra() == weight.algebra(), "conv2d: algebra mismatch");
  require(stride >= 1, "conv2d: stride must be >= 1");
  require(pad >= 0, "conv2d: pad must be >= 0");
  ConvDims d;
  d.batch = x.extent(0);
  d.h = x.extent(1);
  d.w = x.extent(2);
  d.c_in = x.extent(3);
  d.c_out = weight.extent(0);
  require(weight.extent(1) == d.c_in, "conv2d: channel mismatch");
  d.kh = weight.extent(2);
  d.kw = weight.extent(3);
  d.stride = stride;
  d.pad = pad;
  const std::ptrdiff_t h_span = static_cast<std::ptrdiff_t>(d.h) + 2 * pad -
                                static_cast<std::ptrdiff_t>(d.kh);
  const std::ptrdiff_t w_span = static_cast<std::ptrdiff_t>(d.w) + 2 * pad -
                                static_cast<std::ptrdiff_t>(d.kw);
  require(h_span >= 0 && w_span >= 0, "conv2d: kernel larger than padded input");
  d.h_out = static_cast<std::size_t>(h_span) / stride + 1;
  d.w_out = static_cast<std::size_t>(w_span) / stride + 1;
  if (bias)
    require(bias->rank() == 1 && bias->extent(0) == d.c_out,
            "conv2d: bias shape mismatch");
  return d;
}

}  // namespace

AlgebraTensor conv2d_forward(const AlgebraTensor& x, const AlgebraTensor& weight,
                             const AlgebraTensor* bias, int stride, int pad) {
  const ConvDims d = conv_dims(x, weight, bias, stride, pad);
  const AlgebraId& alg = x.algebra();
  const int dim = alg.dim();
  AlgebraTensor out(alg, {d.batch, d.h_out, d.w_out, d.c_out});

  if (bias) {
    for (std::size_t t = 0; t < out.tuple_count(); ++t) {
      const double* bv = bias->tuple(t % d.c_out);
      double* o = out.tuple(t);
      for (int i = 0; i < dim; ++i) o[i] = bv[i];
    }
  }

  const std::ptrdiff_t x_stride =
      static_cast<std::ptrdiff_t>(d.stride) * d.c_in * dim;
  const std::ptrdiff_t o_stride = static_cast<std::ptrdiff_t>(d.c_out) * dim;
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t oy = 0; oy < d.h_out; ++oy) {
      for (std::size_t ky = 0; ky < d.kh; ++ky) {
        const std::ptrdiff_t iy =
            static_cast<std::ptrdiff_t>(oy) * d.stride + ky - d.pad;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
        for (std::size_t kx = 0; kx < d.kw; ++kx) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - d.pad;
          std::size_t ox_lo = 0;
          if (shift < 0)
            ox_lo = static_cast<std::size_t>((-shift + d.stride - 1) / d.stride);
          const std::ptrdiff_t limit =
              static_cast<std::ptrdiff_t>(d.w) - 1 - shift;
          if (limit < 0) continue;
          const std::size_t ox_hi = std::min<std::size_t>(
              d.w_out, static_cast<std::size_t>(limit) / d.stride + 1);
          if (ox_lo >= ox_hi) continue;
          const std::ptrdiff_t ix0 =
              static_cast<std::ptrdiff_t>(ox_lo) * d.stride + shift;
          for (std::size_t ic = 0; ic < d.c_in; ++ic) {
            const double* xin =
                x.tuple(((b * d.h + iy) * d.w + ix0) * d.c_in + ic);
            for (std::size_t oc = 0; oc < d.c_out; ++oc) {
              const double* w =
                  weight.tuple(((oc * d.c_in + ic) * d.kh + ky) * d.kw + kx);
              double* o = out.tuple(
                  ((b * d.h_out + oy) * d.w_out + ox_lo) * d.c_out + oc);
              kernels::axpy(alg, w, xin, x_stride, o, o_stride, ox_hi - ox_lo);
            }
          }
        }
      }
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const AlgebraTensor& x, const AlgebraTensor& weight,
                            bool has_bias, int stride, int pad,
                            const AlgebraTensor& out_adj) {
  const ConvDims d = conv_dims(x, weight, nullptr, stride, pad);
  require(out_adj.rank() == 4 && out_adj.extent(0) == d.batch &&
              out_adj.extent(1) == d.h_out && out_adj.extent(2) == d.w_out &&
              out_adj.extent(3) == d.c_out,
          "conv2d_backward: adjoint shape mismatch");
  const AlgebraId& alg = x.algebra();
  const int dim = alg.dim();
  const StructureTable& right = adjoint_right_table(alg);
  const StructureTable& left = adjoint_left_table(alg);

  Conv2dGrads g;
  g.x = zeros_like(x);
  g.weight = zeros_like(weight);
  if (has_bias) g.bias = AlgebraTensor(alg, {d.c_out});

  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t oy = 0; oy < d.h_out; ++oy)
      for (std::size_t ox = 0; ox < d.w_out; ++ox)
        for (std::size_t oc = 0; oc < d.c_out; ++oc) {
          const double* adj =
              out_adj.tuple(((b * d.h_out + oy) * d.w_out + ox) * d.c_out + oc);
          if (g.bias) {
            double* bias_adj = g.bias->tuple(oc);
            for (int i = 0; i < dim; ++i) bias_adj[i] += adj[i];
          }
          for (std::size_t ky = 0; ky < d.kh; ++ky) {
            const std::ptrdiff_t iy =
                static_cast<std::ptrdiff_t>(oy) * d.stride + ky - d.pad;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
            for (std::size_t kx = 0; kx < d.kw; ++kx) {
              const std::ptrdiff_t ix =
                  static_cast<std::ptrdiff_t>(ox) * d.stride + kx - d.pad;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.w)) continue;
              for (std::size_t ic = 0; ic < d.c_in; ++ic) {
                const std::size_t xi =
                    ((b * d.h + iy) * d.w + ix) * d.c_in + ic;
                const std::size_t wi =
                    ((oc * d.c_in + ic) * d.kh + ky) * d.kw + kx;
                mul_accum(right, weight.tuple(wi), adj, g.x.tuple(xi));
                mul_accum(left, x.tuple(xi), adj, g.weight.tuple(wi));
              }
            }
          }
        }
  return g;
}

// ---- componentwise ----------------------------------------------------------

AlgebraTensor activation_forward(const AlgebraTensor& x, Activation kind) {
  AlgebraTensor out = x;
  for (double& v : out.values()) v = activation_value(kind, v);
  return out;
}

AlgebraTensor activation_backward(const AlgebraTensor& x, Activation kind,
                                  const AlgebraTensor& out_adj) {
  AlgebraTensor g = zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i)
    g.values()[i] =
        out_adj.values()[i] * activation_derivative(kind, x.values()[i]);
  return g;
}

TupleGateResult tuple_gate_forward(const AlgebraTensor& x) {
  TupleGateResult r;
  r.out = x;
  r.keep.assign(x.tuple_count(), 1);
  const int dim = x.dim();
  std::size_t zeroed = 0;
  for (std::size_t t = 0; t < x.tuple_count(); ++t) {
    const double* in = x.tuple(t);
    double mean = 0.0;
    for (int i = 0; i < dim; ++i) mean += in[i];
    mean /= dim;
    if (mean < 0.0) {
      double* o = r.out.tuple(t);
      for (int i = 0; i < dim; ++i) o[i] = 0.0;
      r.keep[t] = 0;
      ++zeroed;
    }
  }
  r.zero_fraction =
      x.tuple_count() ? static_cast<double>(zeroed) / x.tuple_count() : 0.0;
  return r;
}

// ---- lift -------------------------------------------------------------------

AlgebraTensor lift_forward(const AlgebraTensor& x_real, const LiftParams& p) {
  require(x_real.algebra() == AlgebraId::real(), "lift: input must be real");
  const int dim = p.algebra.dim();
  AlgebraTensor out(p.algebra, x_real.shape());
  const std::size_t n = x_real.tuple_count();
  if (dim == 1) {
    std::copy(x_real.values().begin(), x_real.values().end(),
              out.values().begin());
    return out;
  }
  if (!p.mlp) {
    require(p.affine.size() == static_cast<std::size_t>(2 * (dim - 1)),
            "lift: affine params sized for dim-1 extra components");
    const double* ab = p.affine.data();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = x_real.data()[t];
      double* o = out.tuple(t);
      o[0] = v;
      for (int k = 1; k < dim; ++k)
        o[k] = ab[2 * (k - 1)] * v + ab[2 * (k - 1) + 1];
    }
    return out;
  }
  const std::size_t m = p.mlp_w1.size();
  require(p.mlp_w2.size() == m * (dim - 1), "lift: mlp shapes inconsistent");
  std::vector<double> h(m);
  for (std::size_t t = 0; t < n; ++t) {
    const double v = x_real.data()[t];
    double* o = out.tuple(t);
    o[0] = v;
    for (std::size_t j = 0; j < m; ++j)
      h[j] = std::tanh(p.mlp_w1.data()[j] * v + p.mlp_b1.data()[j]);
    for (int k = 1; k < dim; ++k) {
      double acc = p.mlp_b2.data()[k - 1];
      const double* w2 = p.mlp_w2.data() + (k - 1) * m;
      for (std::size_t j = 0; j < m; ++j) acc += w2[j] * h[j];
      o[k] = acc;
    }
  }
  return out;
}

LiftGrads lift_backward(const AlgebraTensor& x_real, const LiftParams& p,
                        const AlgebraTensor& out_adj) {
  const int dim = p.algebra.dim();
  const std::size_t n = x_real.tuple_count();
  LiftGrads g;
  g.x = zeros_like(x_real);
  if (dim == 1) {
    std::copy(out_adj.values().begin(), out_adj.values().end(),
              g.x.values().begin());
    return g;
  }
  if (!p.mlp) {
    g.affine = zeros_like(p.affine);
    const double* ab = p.affine.data();
    double* dab = g.affine.data();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = x_real.data()[t];
      const double* adj = out_adj.tuple(t);
      double dx = adj[0];
      for (int k = 1; k < dim; ++k) {
        dab[2 * (k - 1)] += adj[k] * v;
        dab[2 * (k - 1) + 1] += adj[k];
        dx += adj[k] * ab[2 * (k - 1)];
      }
      g.x.data()[t] = dx;
    }
    return g;
  }
  const std::size_t m = p.mlp_w1.size();
  g.mlp_w1 = zeros_like(p.mlp_w1);
  g.mlp_b1 = zeros_like(p.mlp_b1);
  g.mlp_w2 = zeros_like(p.mlp_w2);
  g.mlp_b2 = zeros_like(p.mlp_b2);
  std::vector<double> h(m), du(m);
  for (std::size_t t = 0; t < n; ++t) {
    const double v = x_real.data()[t];
    const double* adj = out_adj.tuple(t);
    for (std::size_t j = 0; j < m; ++j)
      h[j] = std::tanh(p.mlp_w1.data()[j] * v + p.mlp_b1.data()[j]);
    std::fill(du.begin(), du.end(), 0.0);
    for (int k = 1; k < dim; ++k) {
      const double gk = adj[k];
      const double* w2 = p.mlp_w2.data() + (k - 1) * m;
      double* dw2 = g.mlp_w2.data() + (k - 1) * m;
      g.mlp_b2.data()[k - 1] += gk;
      for (std::size_t j = 0; j < m; ++j) {
        dw2[j] += gk * h[j];
        du[j] += gk * w2[j];
      }
    }
    double dx = adj[0];
    for (std::size_t j = 0; j < m; ++j) {
      const double dpre = du[j] * (1.0 - h[j] * h[j]);
      g.mlp_w1.data()[j] += dpre * v;
      g.mlp_b1.data()[j] += dpre;
      dx += dpre * p.mlp_w1.data()[j];
    }
    g.x.data()[t] = dx;
  }
  return g;
}

// ---- readout ----------------------------------------------------------------

AlgebraTensor logits_readout_forward(const AlgebraTensor& x) {
  AlgebraTensor out(AlgebraId::real(), x.shape());
  const int dim = x.dim();
  for (std::size_t t = 0; t < x.tuple_count(); ++t)
    out.data()[t] = tuple_norm(std::span<const double>(x.tuple(t), dim));
  return out;
}

AlgebraTensor logits_readout_backward(const AlgebraTensor& x,
                                      const AlgebraTensor& out_adj) {
  AlgebraTensor g = zeros_like(x);
  const int dim = x.dim();
  for (std::size_t t = 0; t < x.tuple_count(); ++t) {
    const double* in = x.tuple(t);
    const double norm = tuple_norm(std::span<const double>(in, dim));
    if (norm == 0.0) continue;
    const double s = out_adj.data()[t] / norm;
    double* o = g.tuple(t);
    for (int i = 0; i < dim; ++i) o[i] = s * in[i];
  }
  return g;
}

// ---- batch norm -------------------------------------------------------------

AlgebraTensor batchnorm_forward(const AlgebraTensor& x,
                                const AlgebraTensor& gamma,
                                const AlgebraTensor& beta, BatchNormState& state,
                                bool training, BatchNormCache* cache) {
  require(x.rank() >= 2, "batchnorm: input needs batch and channel axes");
  const std::size_t channels = x.extent(x.rank() - 1);
  const int dim = x.dim();
  const std::size_t slice = channels * dim;
  require(gamma.size() == slice && beta.size() == slice,
          "batchnorm: scale/shift must be [channels] tuples");
  require(state.running_mean.size() == slice,
          "batchnorm: state channel count mismatch");
  const std::size_t rows = x.tuple_count() / channels;  // batch x spatial
  require(rows > 0, "batchnorm: empty input");

  std::vector<double> mean(slice, 0.0), var(slice, 0.0);
  if (training) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = x.data() + r * slice;
      for (std::size_t i = 0; i < slice; ++i) mean[i] += row[i];
    }
    for (std::size_t i = 0; i < slice; ++i) mean[i] /= rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = x.data() + r * slice;
      for (std::size_t i = 0; i < slice; ++i) {
        const double dv = row[i] - mean[i];
        var[i] += dv * dv;
      }
    }
    for (std::size_t i = 0; i < slice; ++i) var[i] /= rows;
    for (std::size_t i = 0; i < slice; ++i) {
      state.running_mean[i] = state.momentum * state.running_mean[i] +
                              (1 - state.momentum) * mean[i];
      state.running_var[i] =
          state.momentum * state.running_var[i] + (1 - state.momentum) * var[i];
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }

  std::vector<double> inv_std(slice);
  for (std::size_t i = 0; i < slice; ++i)
    inv_std[i] = 1.0 / std::sqrt(var[i] + state.epsilon);

  AlgebraTensor out = x;
  std::vector<double> xhat(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data() + r * slice;
    for (std::size_t i = 0; i < slice; ++i) {
      const double norm = (row[i] - mean[i]) * inv_std[i];
      xhat[r * slice + i] = norm;
      row[i] = gamma.data()[i] * norm + beta.data()[i];
    }
  }
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
    cache->training = training;
  }
  return out;
}

BatchNormGrads batchnorm_backward(const AlgebraTensor& x,
                                  const AlgebraTensor& gamma,
                                  const BatchNormCache& cache,
                                  const AlgebraTensor& out_adj) {
  const std::size_t channels = x.extent(x.rank() - 1);
  const int dim = x.dim();
  const std::size_t slice = channels * dim;
  const std::size_t rows = x.tuple_count() / channels;

  BatchNormGrads g;
  g.x = zeros_like(x);
  g.gamma = AlgebraTensor(x.algebra(), {channels});
  g.beta = AlgebraTensor(x.algebra(), {channels});

  std::vector<double> sum_g(slice, 0.0), sum_gx(slice, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* adj = out_adj.data() + r * slice;
    const double* xh = cache.xhat.data() + r * slice;
    for (std::size_t i = 0; i < slice; ++i) {
      sum_g[i] += adj[i];
      sum_gx[i] += adj[i] * xh[i];
    }
  }
  for (std::size_t i = 0; i < slice; ++i) {
    g.gamma.data()[i] = sum_gx[i];
    g.beta.data()[i] = sum_g[i];
  }

  for (std::size_t r = 0; r < rows; ++r) {
    const double* adj = out_adj.data() + r * slice;
    const double* xh = cache.xhat.data() + r * slice;
    double* out = g.x.data() + r * slice;
    for (std::size_t i = 0; i < slice; ++i) {
      const double scale = gamma.data()[i] * cache.inv_std[i];
      if (cache.training) {
        out[i] = scale * (adj[i] - sum_g[i] / rows - xh[i] * sum_gx[i] / rows);
      } else {
        out[i] = scale * adj[i];
      }
    }
  }
  return g;
}

// ---- attention --------------------------------------------------------------

AlgebraTensor flat_attention_score(const AlgebraTensor& k,
                                   const AlgebraTensor& q) {
  require(k.rank() == 3 && q.rank() == 3,
          "flat_attention: inputs must be [heads, len, tuples]");
  require(k.algebra() == q.algebra(), "flat_attention: algebra mismatch");
  require(k.extent(0) == q.extent(0) && k.extent(2) == q.extent(2),
          "flat_attention: head/feature mismatch");
  const std::size_t heads = k.extent(0);
  const std::size_t lk = k.extent(1);
  const std::size_t lq = q.extent(1);
  const std::size_t width = k.extent(2) * k.dim();  // flattened reals
  AlgebraTensor out(AlgebraId::real(), {heads, lk, lq});
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < lk; ++i) {
      const double* krow = k.data() + (h * lk + i) * width;
      for (std::size_t j = 0; j < lq; ++j) {
        const double* qrow = q.data() + (h * lq + j) * width;
        double acc = 0.0;
        for (std::size_t t = 0; t < width; ++t) acc += krow[t] * qrow[t];
        out.data()[(h * lk + i) * lq + j] = acc;
      }
    }
  return out;
}

std::pair<AlgebraTensor, AlgebraTensor> flat_attention_backward(
    const AlgebraTensor& k, const AlgebraTensor& q,
    const AlgebraTensor& out_adj) {
  const std::size_t heads = k.extent(0);
  const std::size_t lk = k.extent(1);
  const std::size_t lq = q.extent(1);
  const std::size_t width = k.extent(2) * k.dim();
  AlgebraTensor gk = zeros_like(k);
  AlgebraTensor gq = zeros_like(q);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < lk; ++i) {
      const double* krow = k.data() + (h * lk + i) * width;
      double* gkrow = gk.data() + (h * lk + i) * width;
      for (std::size_t j = 0; j < lq; ++j) {
        const double a = out_adj.data()[(h * lk + i) * lq + j];
        const double* qrow = q.data() + (h * lq + j) * width;
        double* gqrow = gq.data() + (h * lq + j) * width;
        for (std::size_t t = 0; t < width; ++t) {
          gkrow[t] += a * qrow[t];
          gqrow[t] += a * krow[t];
        }
      }
    }
  return {std::move(gk), std::move(gq)};
}

}  // namespace algnn::nn
