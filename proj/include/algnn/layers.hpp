#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "algnn/rng.hpp"
#include "algnn/tensor.hpp"

namespace algnn::nn {

// All layers multiply weight-on-left: out = sum mul(W, x). The order matters
// for the non-commutative algebras and is pinned by regression tests.

enum class Activation { kRelu, kSwish, kTanh, kSigmoid };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);
double activation_value(Activation kind, double v);
double activation_derivative(Activation kind, double v);

struct LinearParams {
  AlgebraTensor weight;               // [out_channels, in_channels]
  std::optional<AlgebraTensor> bias;  // [out_channels]
};

struct Conv2dParams {
  AlgebraTensor weight;               // [out_channels, in_channels, kh, kw]
  std::optional<AlgebraTensor> bias;  // [out_channels]
  int stride = 1;
  int pad = 0;
};

/// Gate order: update (z), reset (r), candidate (n). Hidden size is counted
/// in tuples. Gate linears are bias-free; one bias tuple vector per gate.
struct GruParams {
  LinearParams wx_update, wh_update;
  LinearParams wx_reset, wh_reset;
  LinearParams wx_cand, wh_cand;
  AlgebraTensor b_update, b_reset, b_cand;  // [hidden]
};

/// Running statistics for batch normalization, per (channel, tuple component)
/// flattened channel-major to length channels * dim. The learnable
/// scale/shift are ordinary parameters outside this struct. `momentum` is the
/// fraction of the old running value kept at each update.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.9;
  double epsilon = 1e-5;

  static BatchNormState make(const AlgebraId& algebra, std::size_t channels);
};

/// Input lift: component 0 carries the real input; components 1..dim-1 come
/// from learned per-component maps of it.
///   affine mode: t_k = scale_k * x + shift_k           (params [dim-1, 2])
///   mlp mode:    t_k = w2[k] . tanh(w1 * x + b1) + b2[k]
struct LiftParams {
  AlgebraId algebra;
  AlgebraTensor affine;          // Real [dim-1, 2]; unused in mlp mode
  AlgebraTensor mlp_w1, mlp_b1;  // Real [m]
  AlgebraTensor mlp_w2;          // Real [dim-1, m]
  AlgebraTensor mlp_b2;          // Real [dim-1]
  bool mlp = false;

  static LiftParams affine_lift(const AlgebraId& algebra);
  static LiftParams mlp_lift(const AlgebraId& algebra, std::size_t hidden,
                             Rng& rng);
};

// ---- initialization ---------------------------------------------------------

/// Glorot-uniform each tuple component independently: U over
/// +-sqrt(6/(fan_in + fan_out)), fans counted in tuples.
void glorot_init(AlgebraTensor& weight, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng);

/// Fans from a weight shape [out, in, k...]: fan_in = in * prod(k),
/// fan_out = out * prod(k).
std::pair<std::size_t, std::size_t> weight_fans(const AlgebraTensor& weight);

LinearParams make_linear(const AlgebraId& algebra, std::size_t in,
                         std::size_t out, bool bias, Rng& rng);
Conv2dParams make_conv2d(const AlgebraId& algebra, std::size_t in,
                         std::size_t out, int k, int stride, int pad, bool bias,
                         Rng& rng);
GruParams make_gru(const AlgebraId& algebra, std::size_t in, std::size_t hidden,
                   Rng& rng);

// ---- forward ----------------------------------------------------------------

/// x [B, C_in] -> [B, C_out]; bias may be null.
AlgebraTensor linear_forward(const AlgebraTensor& x, const AlgebraTensor& weight,
                             const AlgebraTensor* bias);
inline AlgebraTensor linear_forward(const AlgebraTensor& x,
                                    const LinearParams& p) {
  return linear_forward(x, p.weight, p.bias ? &*p.bias : nullptr);
}

/// x [B, H, W, C_in] -> [B, H_out, W_out, C_out], zero padding.
AlgebraTensor conv2d_forward(const AlgebraTensor& x, const AlgebraTensor& weight,
                             const AlgebraTensor* bias, int stride, int pad);
inline AlgebraTensor conv2d_forward(const AlgebraTensor& x,
                                    const Conv2dParams& p) {
  return conv2d_forward(x, p.weight, p.bias ? &*p.bias : nullptr, p.stride,
                        p.pad);
}

AlgebraTensor activation_forward(const AlgebraTensor& x, Activation kind);

/// Heaviside-of-tuple-mean gate; H(0) = 1, so a zero mean passes. Returns the
/// gated tensor, a per-tuple keep mask, and the fraction of tuples zeroed.
struct TupleGateResult {
  AlgebraTensor out;
  std::vector<char> keep;
  double zero_fraction = 0.0;
};
TupleGateResult tuple_gate_forward(const AlgebraTensor& x);

/// x_real must be a Real tensor; output takes the lift algebra and x's shape.
AlgebraTensor lift_forward(const AlgebraTensor& x_real, const LiftParams& p);

/// Tuple-wise L2 norm; Real tensor of the same shape, all entries >= 0.
AlgebraTensor logits_readout_forward(const AlgebraTensor& x);

struct BatchNormCache {
  std::vector<double> xhat;     // normalized values, full tensor size
  std::vector<double> inv_std;  // per (channel, component)
  bool training = false;
};
AlgebraTensor batchnorm_forward(const AlgebraTensor& x,
                                const AlgebraTensor& gamma,
                                const AlgebraTensor& beta, BatchNormState& state,
                                bool training, BatchNormCache* cache = nullptr);

/// k, q [heads, L, D] -> Real [heads, Lk, Lq]; plain dot product of tuples
/// flattened to reals.
AlgebraTensor flat_attention_score(const AlgebraTensor& k,
                                   const AlgebraTensor& q);

// ---- backward ---------------------------------------------------------------

struct LinearGrads {
  AlgebraTensor x;
  AlgebraTensor weight;
  std::optional<AlgebraTensor> bias;
};
LinearGrads linear_backward(const AlgebraTensor& x, const AlgebraTensor& weight,
                            bool has_bias, const AlgebraTensor& out_adj);

struct Conv2dGrads {
  AlgebraTensor x;
  AlgebraTensor weight;
  std::optional<AlgebraTensor> bias;
};
Conv2dGrads conv2d_backward(const AlgebraTensor& x, const AlgebraTensor& weight,
                            bool has_bias, int stride, int pad,
                            const AlgebraTensor& out_adj);

AlgebraTensor activation_backward(const AlgebraTensor& x, Activation kind,
                                  const AlgebraTensor& out_adj);

struct BatchNormGrads {
  AlgebraTensor x;
  AlgebraTensor gamma;
  AlgebraTensor beta;
};
BatchNormGrads batchnorm_backward(const AlgebraTensor& x,
                                  const AlgebraTensor& gamma,
                                  const BatchNormCache& cache,
                                  const AlgebraTensor& out_adj);

struct LiftGrads {
  AlgebraTensor x;
  AlgebraTensor affine;
  AlgebraTensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};
LiftGrads lift_backward(const AlgebraTensor& x_real, const LiftParams& p,
                        const AlgebraTensor& out_adj);

/// Adjoint of the norm readout; zero tuples get zero adjoints.
AlgebraTensor logits_readout_backward(const AlgebraTensor& x,
                                      const AlgebraTensor& out_adj);

std::pair<AlgebraTensor, AlgebraTensor> flat_attention_backward(
    const AlgebraTensor& k, const AlgebraTensor& q,
    const AlgebraTensor& out_adj);

}  // namespace algnn::nn
