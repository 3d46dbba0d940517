#include <doctest.h>

#include <cmath>

#include "algnn/grad_check.hpp"
#include "algnn/layers.hpp"
#include "algnn/tape.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace algnn;
using namespace algnn::test;

namespace {

AlgebraTensor random_tensor(Rng& rng, const AlgebraId& alg,
                            std::vector<std::size_t> shape, double lo = -1.0,
                            double hi = 1.0) {
  AlgebraTensor t(alg, std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("real linear layer degenerates to a dense layer") {
  Rng rng(1);
  const std::size_t batch = 3, c_in = 4, c_out = 2;
  const AlgebraTensor x = random_tensor(rng, AlgebraId::real(), {batch, c_in});
  nn::LinearParams p = nn::make_linear(AlgebraId::real(), c_in, c_out, true, rng);
  for (double& v : p.bias->values()) v = rng.uniform(-1, 1);
  const AlgebraTensor got = nn::linear_forward(x, p);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = p.bias->data()[o];
      for (std::size_t c = 0; c < c_in; ++c)
        acc += p.weight.data()[o * c_in + c] * x.data()[b * c_in + c];
      CHECK(got.data()[b * c_out + o] == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("m2r identity weight passes input through") {
  AlgebraTensor x(AlgebraId::m2r(), {1, 1}, {5, -2, 3.5, 7});
  AlgebraTensor w(AlgebraId::m2r(), {1, 1}, {1, 0, 0, 1});
  const AlgebraTensor out = nn::linear_forward(x, w, nullptr);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(out.values()[i] == x.values()[i]);
}

TEST_CASE("linear validates shapes and algebras") {
  Rng rng(2);
  const AlgebraTensor x = random_tensor(rng, AlgebraId::complex(), {2, 3});
  const AlgebraTensor w_wrong_alg = random_tensor(rng, AlgebraId::dual(), {2, 3});
  const AlgebraTensor w_wrong_ch = random_tensor(rng, AlgebraId::complex(), {2, 4});
  CHECK_THROWS_AS(nn::linear_forward(x, w_wrong_alg, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(nn::linear_forward(x, w_wrong_ch, nullptr),
                  std::invalid_argument);
}

TEST_CASE("linear matches the rule-indexed component assembly") {
  Rng rng(3);
  for (const AlgebraId& alg : all_algebras()) {
    const AlgebraTensor x = random_tensor(rng, alg, {2, 5});
    nn::LinearParams p = nn::make_linear(alg, 5, 3, true, rng);
    for (double& v : p.bias->values()) v = rng.uniform(-1, 1);
    const AlgebraTensor got = nn::linear_forward(x, p);
    const AlgebraTensor want = rule_indexed_linear(x, p.weight, &*p.bias);
    CAPTURE(alg.name());
    CHECK(max_rel_diff(got.values(), want.values()) < 1e-12);
  }
}

TEST_CASE("1x1 conv at stride 1 equals a pixel-wise linear layer") {
  Rng rng(4);
  const AlgebraId alg = AlgebraId::quaternion();
  const std::size_t b = 2, h = 3, w = 3, cin = 2, cout = 4;
  const AlgebraTensor x = random_tensor(rng, alg, {b, h, w, cin});
  nn::Conv2dParams conv = nn::make_conv2d(alg, cin, cout, 1, 1, 0, true, rng);
  for (double& v : conv.bias->values()) v = rng.uniform(-1, 1);
  const AlgebraTensor got = nn::conv2d_forward(x, conv);

  AlgebraTensor flat(alg, {b * h * w, cin});
  std::copy(x.values().begin(), x.values().end(), flat.values().begin());
  AlgebraTensor w2(alg, {cout, cin});
  std::copy(conv.weight.values().begin(), conv.weight.values().end(),
            w2.values().begin());
  const AlgebraTensor lin = nn::linear_forward(flat, w2, &*conv.bias);
  CHECK(max_rel_diff(got.values(), lin.values()) < 1e-13);
}

TEST_CASE("complex 1-pixel conv is the complex product") {
  AlgebraTensor x(AlgebraId::complex(), {1, 1, 1, 1}, {0.3, -0.8});
  AlgebraTensor w(AlgebraId::complex(), {1, 1, 1, 1}, {1.5, 0.25});
  nn::Conv2dParams p;
  p.weight = w;
  const AlgebraTensor out = nn::conv2d_forward(x, p);
  const Tuple want = complex_oracle({1.5, 0.25}, {0.3, -0.8});
  CHECK(out.values()[0] == doctest::Approx(want[0]).epsilon(1e-15));
  CHECK(out.values()[1] == doctest::Approx(want[1]).epsilon(1e-15));
}

TEST_CASE("conv matches the brute-force loop oracle") {
  Rng rng(5);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      const AlgebraId alg = AlgebraId::m2r();
      const AlgebraTensor x = random_tensor(rng, alg, {2, 5, 6, 3});
      nn::Conv2dParams p = nn::make_conv2d(alg, 3, 2, 3, stride, pad, true, rng);
      for (double& v : p.bias->values()) v = rng.uniform(-1, 1);
      const AlgebraTensor got = nn::conv2d_forward(x, p);
      const AlgebraTensor want =
          brute_conv2d(x, p.weight, &*p.bias, stride, pad);
      CAPTURE(stride);
      CAPTURE(pad);
      REQUIRE(got.shape() == want.shape());
      CHECK(max_rel_diff(got.values(), want.values()) < 1e-12);
    }
  }
}

TEST_CASE("conv matches the rule-indexed component assembly for every algebra") {
  Rng rng(6);
  for (const AlgebraId& alg : all_algebras()) {
    const AlgebraTensor x = random_tensor(rng, alg, {1, 4, 4, 2});
    nn::Conv2dParams p = nn::make_conv2d(alg, 2, 2, 3, 1, 1, false, rng);
    const AlgebraTensor got = nn::conv2d_forward(x, p);
    const AlgebraTensor want =
        rule_indexed_conv2d(x, p.weight, nullptr, 1, 1);
    CAPTURE(alg.name());
    CHECK(max_rel_diff(got.values(), want.values()) < 1e-12);
  }
}

TEST_CASE("activation examples") {
  AlgebraTensor x(AlgebraId::complex(), {1}, {-2.0, 3.0});
  const AlgebraTensor relu = nn::activation_forward(x, nn::Activation::kRelu);
  CHECK(relu.values()[0] == 0.0);
  CHECK(relu.values()[1] == 3.0);

  CHECK(nn::activation_value(nn::Activation::kSwish, 0.0) == 0.0);

  Rng rng(7);
  AlgebraTensor q = random_tensor(rng, AlgebraId::quaternion(), {3});
  const AlgebraTensor t = nn::activation_forward(q, nn::Activation::kTanh);
  CHECK(t.size() == q.size());
  CHECK(t.dim() == 4);

  // Derivatives against a scalar central difference.
  for (nn::Activation kind :
       {nn::Activation::kSwish, nn::Activation::kTanh, nn::Activation::kSigmoid}) {
    for (double v : {-1.3, -0.2, 0.4, 2.1}) {
      const double h = 1e-6;
      const double fd = (nn::activation_value(kind, v + h) -
                         nn::activation_value(kind, v - h)) /
                        (2 * h);
      CHECK(nn::activation_derivative(kind, v) ==
            doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("tuple gate worked examples") {
  AlgebraTensor x(AlgebraId::quaternion(), {3},
                  {1, 2, 3, 4, -1, -2, 1, 0, 1, -1, 1, -1});
  auto r = nn::tuple_gate_forward(x);
  // First tuple mean 2.5 > 0: unchanged.
  for (int i = 0; i < 4; ++i) CHECK(r.out.tuple(0)[i] == x.tuple(0)[i]);
  // Second tuple mean -0.5 < 0: zeroed.
  for (int i = 0; i < 4; ++i) CHECK(r.out.tuple(1)[i] == 0.0);
  // Third tuple mean exactly 0: H(0) = 1 keeps it.
  for (int i = 0; i < 4; ++i) CHECK(r.out.tuple(2)[i] == x.tuple(2)[i]);
  CHECK(r.zero_fraction == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("lift worked examples") {
  // Real algebra: identity, no params.
  {
    AlgebraTensor x(AlgebraId::real(), {2, 2}, {1, 2, 3, 4});
    const auto p = nn::LiftParams::affine_lift(AlgebraId::real());
    const AlgebraTensor out = nn::lift_forward(x, p);
    CHECK(out.values()[2] == 3.0);
  }
  // Zero lift weights: extra components all zero.
  {
    AlgebraTensor x(AlgebraId::real(), {3}, {0.5, -1.0, 2.0});
    auto p = nn::LiftParams::affine_lift(AlgebraId::quaternion());
    p.affine.fill(0.0);
    const AlgebraTensor out = nn::lift_forward(x, p);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(out.tuple(t)[0] == x.data()[t]);
      for (int k = 1; k < 4; ++k) CHECK(out.tuple(t)[k] == 0.0);
    }
  }
  // Complex lift keeps component 0 equal to the input exactly.
  {
    Rng rng(8);
    AlgebraTensor x = random_tensor(rng, AlgebraId::real(), {4});
    auto p = nn::LiftParams::affine_lift(AlgebraId::complex());
    for (double& v : p.affine.values()) v = rng.uniform(-1, 1);
    const AlgebraTensor out = nn::lift_forward(x, p);
    CHECK(out.dim() == 2);
    for (std::size_t t = 0; t < 4; ++t) CHECK(out.tuple(t)[0] == x.data()[t]);
  }
}

TEST_CASE("mlp lift gradients match finite differences") {
  auto make = [](Rng& rng) {
    auto p = nn::LiftParams::mlp_lift(AlgebraId::m2r(), 5, rng);
    for (double& v : p.mlp_b1.values()) v = rng.uniform(-0.3, 0.3);
    AlgebraTensor x = random_tensor(rng, AlgebraId::real(), {4});
    FragmentSpec spec;
    spec.params = {p.mlp_w1, p.mlp_b1, p.mlp_w2, p.mlp_b2};
    nn::LiftParams shape = p;
    spec.build = [x, shape](Tape& t, const std::vector<ValueId>& ids) {
      ValueId lifted = t.lift(t.input(x), shape, ids);
      return t.sum(t.logits_readout(lifted));
    };
    return spec;
  };
  CHECK(grad_check(make, 31) < 1e-6);
}

TEST_CASE("logits readout examples") {
  AlgebraTensor x(AlgebraId::complex(), {1, 2}, {3, 4, 0, 0});
  const AlgebraTensor logits = nn::logits_readout_forward(x);
  CHECK(logits.values()[0] == 5.0);
  CHECK(logits.values()[1] == 0.0);
  CHECK(logits.algebra() == AlgebraId::real());

  AlgebraTensor xr(AlgebraId::real(), {1, 1}, {-2.5});
  CHECK(nn::logits_readout_forward(xr).values()[0] == 2.5);
}

TEST_CASE("batchnorm standardizes each channel-component slice") {
  Rng rng(9);
  const AlgebraId alg = AlgebraId::complex();
  const std::size_t batch = 64, channels = 3;
  AlgebraTensor x = random_tensor(rng, alg, {batch, channels}, -2.0, 5.0);
  AlgebraTensor gamma(alg, {channels});
  gamma.fill(1.0);
  AlgebraTensor beta(alg, {channels});
  auto state = nn::BatchNormState::make(alg, channels);
  const AlgebraTensor out =
      nn::batchnorm_forward(x, gamma, beta, state, /*training=*/true);

  const std::size_t slice = channels * alg.dim();
  for (std::size_t i = 0; i < slice; ++i) {
    double mean = 0.0, var = 0.0;
    for (std::size_t b = 0; b < batch; ++b) mean += out.data()[b * slice + i];
    mean /= batch;
    for (std::size_t b = 0; b < batch; ++b) {
      const double d = out.data()[b * slice + i] - mean;
      var += d * d;
    }
    var /= batch;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }
}

TEST_CASE("batchnorm on constant input returns the shift parameter") {
  const AlgebraId alg = AlgebraId::dual();
  AlgebraTensor x(alg, {8, 2});
  x.fill(3.75);
  AlgebraTensor gamma(alg, {2});
  gamma.fill(1.0);
  AlgebraTensor beta(alg, {2});
  beta.fill(-0.5);
  auto state = nn::BatchNormState::make(alg, 2);
  const AlgebraTensor out = nn::batchnorm_forward(x, gamma, beta, state, true);
  for (double v : out.values()) CHECK(v == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("batchnorm eval mode uses running statistics") {
  const AlgebraId alg = AlgebraId::real();
  AlgebraTensor gamma(alg, {1});
  gamma.fill(1.0);
  AlgebraTensor beta(alg, {1});
  auto state = nn::BatchNormState::make(alg, 1);
  state.momentum = 0.0;  // adopt batch stats immediately
  AlgebraTensor x(alg, {4, 1}, {1, 2, 3, 4});
  nn::batchnorm_forward(x, gamma, beta, state, true);
  CHECK(state.running_mean[0] == doctest::Approx(2.5));
  CHECK(state.running_var[0] == doctest::Approx(1.25));

  AlgebraTensor probe(alg, {1, 1}, {2.5});
  const AlgebraTensor out = nn::batchnorm_forward(probe, gamma, beta, state,
                                                  /*training=*/false);
  CHECK(out.values()[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("batchnorm gradients match finite differences") {
  auto make = [](Rng& rng) {
    const AlgebraId alg = AlgebraId::m2r();
    const std::size_t batch = 5, channels = 2;
    AlgebraTensor x = random_tensor(rng, alg, {batch, channels});
    AlgebraTensor gamma = random_tensor(rng, alg, {channels}, 0.5, 1.5);
    AlgebraTensor beta = random_tensor(rng, alg, {channels}, -0.3, 0.3);
    AlgebraTensor w = random_tensor(rng, alg, {batch, channels});
    FragmentSpec spec;
    spec.params = {x, gamma, beta};
    spec.build = [w](Tape& t, const std::vector<ValueId>& ids) {
      auto state = std::make_shared<nn::BatchNormState>(
          nn::BatchNormState::make(AlgebraId::m2r(), 2));
      ValueId y = t.batchnorm(ids[0], ids[1], ids[2], *state, true);
      return t.sum(t.comp_mul(y, t.input(w)));
    };
    return spec;
  };
  CHECK(grad_check(make, 77) < 1e-5);
}

TEST_CASE("flat attention equals the reshape oracle and ignores grouping") {
  Rng rng(10);
  const std::size_t heads = 2, len = 3, tuples = 4;
  const AlgebraId alg = AlgebraId::complex();
  const AlgebraTensor k = random_tensor(rng, alg, {heads, len, tuples});
  const AlgebraTensor q = random_tensor(rng, alg, {heads, len, tuples});
  const AlgebraTensor score = nn::flat_attention_score(k, q);

  // Oracle: reshape to reals first, then dot.
  const std::size_t width = tuples * alg.dim();
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j) {
        double want = 0.0;
        for (std::size_t t = 0; t < width; ++t)
          want += k.data()[(h * len + i) * width + t] *
                  q.data()[(h * len + j) * width + t];
        CHECK(score.data()[(h * len + i) * len + j] == want);
      }

  // Same reals viewed as real tuples give identical scores.
  AlgebraTensor kr(AlgebraId::real(), {heads, len, width},
                   std::vector<double>(k.values().begin(), k.values().end()));
  AlgebraTensor qr(AlgebraId::real(), {heads, len, width},
                   std::vector<double>(q.values().begin(), q.values().end()));
  const AlgebraTensor score_r = nn::flat_attention_score(kr, qr);
  for (std::size_t i = 0; i < score.size(); ++i)
    CHECK(score.values()[i] == score_r.values()[i]);
}

TEST_CASE("m2r identity-tuple attention score is 2") {
  AlgebraTensor k(AlgebraId::m2r(), {1, 1, 1}, {1, 0, 0, 1});
  const AlgebraTensor s = nn::flat_attention_score(k, k);
  CHECK(s.values()[0] == 2.0);
}

TEST_CASE("glorot is deterministic and has the right variance") {
  const AlgebraId alg = AlgebraId::m2r();
  AlgebraTensor a(alg, {50, 50});
  AlgebraTensor b(alg, {50, 50});
  {
    Rng r1(42), r2(42);
    nn::glorot_init(a, 50, 50, r1);
    nn::glorot_init(b, 50, 50, r2);
  }
  CHECK(a.values()[0] == b.values()[0]);
  CHECK(max_abs_diff(a.values(), b.values()) == 0.0);

  // Uniform(+-sqrt(6/f)) has variance 2/f; 10^5 draws land within 5%.
  const double expect = 2.0 / 100.0;
  double mean = 0.0, var = 0.0;
  const std::size_t n = a.size();  // 10^4 tuples x 4 = 4*10^4... use both
  for (double v : a.values()) mean += v;
  for (double v : b.values()) mean += v;
  mean /= (2.0 * n);
  for (double v : a.values()) var += (v - mean) * (v - mean);
  for (double v : b.values()) var += (v - mean) * (v - mean);
  var /= (2.0 * n);
  CHECK(std::abs(var - expect) / expect < 0.05);
}

TEST_CASE("weight stays on the left of every product") {
  // For the non-commutative algebras, swapping the operands must change the
  // output.
  Rng rng(12);
  for (const AlgebraId& alg :
       {AlgebraId::quaternion(), AlgebraId::m2r(), AlgebraId::m3r(),
        AlgebraId::m4r(), AlgebraId::m2c()}) {
    const AlgebraTensor x = random_tensor(rng, alg, {1, 3});
    nn::LinearParams p = nn::make_linear(alg, 3, 2, false, rng);
    const AlgebraTensor out = nn::linear_forward(x, p);

    // Swapped variant computed against the reference product.
    AlgebraTensor swapped(alg, {1, 2});
    const StructureTable& table = structure_table(alg);
    for (std::size_t o = 0; o < 2; ++o)
      for (std::size_t c = 0; c < 3; ++c)
        mul_accum(table, x.tuple(c), p.weight.tuple(o * 3 + c),
                  swapped.tuple(o));
    CAPTURE(alg.name());
    CHECK(max_abs_diff(out.values(), swapped.values()) > 1e-6);
  }
}

TEST_CASE("linear and conv gradients match finite differences (spot)") {
  for (const AlgebraId& alg : {AlgebraId::complex(), AlgebraId::m3r()}) {
    auto make_linear_frag = [&](Rng& rng) {
      nn::LinearParams p = nn::make_linear(alg, 3, 2, true, rng);
      for (double& v : p.bias->values()) v = rng.uniform(-0.5, 0.5);
      AlgebraTensor x = random_tensor(rng, alg, {2, 3});
      FragmentSpec spec;
      spec.params = {p.weight, *p.bias};
      spec.build = [x](Tape& t, const std::vector<ValueId>& ids) {
        return t.sum(t.logits_readout(t.linear(t.input(x), ids[0], ids[1])));
      };
      return spec;
    };
    CAPTURE(alg.name());
    CHECK(grad_check(make_linear_frag, 55) < 1e-5);

    auto make_conv_frag = [&](Rng& rng) {
      nn::Conv2dParams p = nn::make_conv2d(alg, 2, 2, 3, 2, 1, true, rng);
      for (double& v : p.bias->values()) v = rng.uniform(-0.5, 0.5);
      AlgebraTensor x = random_tensor(rng, alg, {1, 4, 4, 2});
      FragmentSpec spec;
      spec.params = {p.weight, *p.bias};
      spec.build = [x](Tape& t, const std::vector<ValueId>& ids) {
        ValueId y = t.conv2d(t.input(x), ids[0], ids[1], 2, 1);
        return t.sum(t.logits_readout(y));
      };
      return spec;
    };
    CHECK(grad_check(make_conv_frag, 56) < 1e-5);
  }
}
