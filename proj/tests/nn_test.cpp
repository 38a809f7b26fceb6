#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "acarec/nn/adam.hpp"
#include "acarec/nn/checkpoint.hpp"
#include "acarec/nn/gradcheck.hpp"
#include "acarec/nn/layers.hpp"
#include "test_util.hpp"

namespace acarec::nn {
namespace {

using acarec::testing::random_matrix;
using acarec::testing::weighted_sum;

constexpr int kSeeds = 20;

// Bundles layer parameters with the layer inputs so one gradient check covers
// both dL/dparams and dL/dinputs.
struct LinearProbe {
  using scalar_type = double;
  LinearParams<double> layer;
  MatrixD x;
  template <class F> void visit(F&& f) { layer.visit(prefixed("layer", f)); f("x", x); }
  template <class F> void visit(F&& f) const { layer.visit(prefixed("layer", f)); f("x", x); }
};

struct MhaProbe {
  using scalar_type = double;
  MhaParams<double> attn;
  MatrixD q, k, v;
  template <class F> void visit(F&& f) {
    attn.visit(prefixed("attn", f)); f("q", q); f("k", k); f("v", v);
  }
  template <class F> void visit(F&& f) const {
    attn.visit(prefixed("attn", f)); f("q", q); f("k", k); f("v", v);
  }
};

struct GruProbe {
  using scalar_type = double;
  GruParams<double> cell;
  MatrixD h, x;
  template <class F> void visit(F&& f) { cell.visit(prefixed("cell", f)); f("h", h); f("x", x); }
  template <class F> void visit(F&& f) const { cell.visit(prefixed("cell", f)); f("h", h); f("x", x); }
};

struct GluProbe {
  using scalar_type = double;
  GluParams<double> unit;
  MatrixD x;
  template <class F> void visit(F&& f) { unit.visit(prefixed("unit", f)); f("x", x); }
  template <class F> void visit(F&& f) const { unit.visit(prefixed("unit", f)); f("x", x); }
};

// ---------------------------------------------------------------------------
// linear

TEST(Linear, IdentityWeightsReturnInput) {
  LinearParams<double> p{MatrixD::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), MatrixD(1, 3)};
  const auto x = MatrixD::from_rows({{0.5, -2, 3}});
  EXPECT_EQ(linear_forward(x, p), x);
}

TEST(Linear, HandComputedAffineMap) {
  LinearParams<double> p{MatrixD::from_rows({{1, 0}, {0, 1}, {1, 1}}), MatrixD::from_rows({{0, 0, 1}})};
  const auto y = linear_forward(MatrixD::from_rows({{1, 2}}), p);
  EXPECT_EQ(y, MatrixD::from_rows({{1, 2, 4}}));
}

TEST(Linear, ShapeMismatchNamesOperands) {
  LinearParams<double> p = LinearParams<double>::zeros(3, 2);
  try {
    linear_forward(MatrixD(1, 4), p);
    FAIL() << "expected a dimension error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    EXPECT_NE(std::string(e.what()).find("1x4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
}

double linear_probe_loss(const LinearProbe& p) {
  const auto y = linear_forward(p.x, p.layer);
  return squared_norm(y);
}

double linear_probe_grad(const LinearProbe& p, LinearProbe& g) {
  const auto y = linear_forward(p.x, p.layer);
  g.x += linear_backward(p.x, p.layer, y * 2.0, g.layer);
  return squared_norm(y);
}

TEST(Linear, GradientOfSquaredOutputMatchesFiniteDifferences) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng = make_rng(seed);
    LinearProbe probe{LinearParams<double>::init(4, 3, rng), random_matrix(2, 4, rng)};
    probe.layer.bias = random_matrix(1, 3, rng);
    const auto r = grad_check(probe, linear_probe_grad, linear_probe_loss);
    EXPECT_LT(r.max_error, 1e-6) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

TEST(GradCheck, DetectsSignFlippedBackward) {
  Rng rng = make_rng(7);
  LinearProbe probe{LinearParams<double>::init(4, 3, rng), random_matrix(2, 4, rng)};
  auto corrupted = [](const LinearProbe& p, LinearProbe& g) {
    const auto y = linear_forward(p.x, p.layer);
    g.x += linear_backward(p.x, p.layer, y * -2.0, g.layer);
    return squared_norm(y);
  };
  const auto r = grad_check(probe, corrupted, linear_probe_loss);
  EXPECT_GT(r.max_error, 1e-2);
  EXPECT_FALSE(r.passed());
}

// ---------------------------------------------------------------------------
// attention

MhaParams<double> identity_mha(std::size_t d, std::size_t heads) {
  MhaParams<double> p;
  p.heads = heads;
  p.head_dim = d / heads;
  MatrixD eye(d, d);
  for (std::size_t i = 0; i < d; ++i) eye(i, i) = 1.0;
  p.w_q = p.w_k = p.w_v = p.w_o = eye;
  return p;
}

TEST(Attention, SingleKeyReturnsItsValue) {
  auto p = identity_mha(3, 1);
  MhaCache<double> cache;
  const auto v = MatrixD::from_rows({{4, -1, 2}});
  const auto out = mha_forward(MatrixD::from_rows({{1, 2, 3}}), MatrixD::from_rows({{0.3, 0, 1}}), v, p, cache);
  EXPECT_EQ(out, v);
}

TEST(Attention, IdenticalKeysAverageValues) {
  auto p = identity_mha(2, 1);
  MhaCache<double> cache;
  const auto k = MatrixD::from_rows({{1, 1}, {1, 1}});
  const auto v = MatrixD::from_rows({{2, 0}, {4, 6}});
  const auto out = mha_forward(MatrixD::from_rows({{0.5, -1}}), k, v, p, cache);
  EXPECT_DOUBLE_EQ(cache.attn[0](0, 0), 0.5);
  EXPECT_DOUBLE_EQ(cache.attn[0](0, 1), 0.5);
  EXPECT_NEAR(out(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(out(0, 1), 3.0, 1e-12);
}

// Independent dense implementation: explicit per-head loops over plain arrays.
std::vector<std::vector<double>> naive_attention(const MatrixD& q, const MatrixD& k, const MatrixD& v,
                                                 const MhaParams<double>& p,
                                                 const std::vector<bool>& keep,
                                                 std::vector<std::vector<std::vector<double>>>& weights) {
  const std::size_t dh = p.head_dim;
  std::vector<std::vector<double>> concat(q.rows(), std::vector<double>(p.heads * dh, 0.0));
  weights.assign(p.heads, {});
  auto project = [&](const MatrixD& x, const MatrixD& w, std::size_t row, std::size_t col) {
    double s = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) s += x(row, c) * w(c, col);
    return s;
  };
  for (std::size_t h = 0; h < p.heads; ++h) {
    for (std::size_t i = 0; i < q.rows(); ++i) {
      std::vector<double> logits(k.rows());
      for (std::size_t j = 0; j < k.rows(); ++j) {
        double s = 0;
        for (std::size_t c = 0; c < dh; ++c)
          s += project(q, p.w_q, i, h * dh + c) * project(k, p.w_k, j, h * dh + c);
        logits[j] = s / std::sqrt(static_cast<double>(dh));
      }
      double total = 0;
      std::vector<double> a(k.rows(), 0.0);
      for (std::size_t j = 0; j < k.rows(); ++j)
        if (keep[j]) total += (a[j] = std::exp(logits[j]));
      for (auto& x : a) x /= total;
      for (std::size_t c = 0; c < dh; ++c)
        for (std::size_t j = 0; j < k.rows(); ++j)
          concat[i][h * dh + c] += a[j] * project(v, p.w_v, j, h * dh + c);
      weights[h].push_back(a);
    }
  }
  std::vector<std::vector<double>> out(q.rows(), std::vector<double>(p.w_o.cols(), 0.0));
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t o = 0; o < p.w_o.cols(); ++o)
      for (std::size_t c = 0; c < p.heads * dh; ++c) out[i][o] += concat[i][c] * p.w_o(c, o);
  return out;
}

TEST(Attention, MatchesNaiveDenseOracle) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng = make_rng(seed, 1);
    auto p = MhaParams<double>::init({4, 4, 4, 4, 2}, rng);
    const auto q = random_matrix(3, 4, rng), k = random_matrix(3, 4, rng), v = random_matrix(3, 4, rng);
    std::vector<bool> keep = {true, seed % 2 == 0, true};
    std::vector<std::vector<std::vector<double>>> oracle_weights;
    const auto expected = naive_attention(q, k, v, p, keep, oracle_weights);

    bool keep_arr[3] = {keep[0], keep[1], keep[2]};
    MhaCache<double> cache;
    const auto out = mha_forward(q, k, v, p, cache, std::span<const bool>(keep_arr, 3));
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t o = 0; o < 4; ++o) EXPECT_NEAR(out(i, o), expected[i][o], 1e-12);
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < 3; ++j) {
          EXPECT_NEAR(cache.attn[h](i, j), oracle_weights[h][i][j], 1e-12);
          sum += cache.attn[h](i, j);
        }
        EXPECT_NEAR(sum, 1.0, 1e-6);
      }
  }
}

TEST(Attention, SoftmaxSurvivesExtremeLogits) {
  MatrixD s = MatrixD::from_rows({{1e4, -1e4, 0}, {-1e4, -1e4, -1e4}});
  softmax_rows_inplace(s);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(s(1, j), 1.0 / 3.0, 1e-12);
  Matrix f = Matrix::from_rows({{1e4f, 9999.f}});
  softmax_rows_inplace(f);
  EXPECT_TRUE(all_finite(f));
}

TEST(Attention, AllMaskedIsEmptyContextError) {
  auto p = identity_mha(2, 1);
  MhaCache<double> cache;
  bool keep[2] = {false, false};
  try {
    mha_forward(MatrixD(1, 2, 1.0), MatrixD(2, 2, 1.0), MatrixD(2, 2, 1.0), p, cache,
                std::span<const bool>(keep, 2));
    FAIL() << "expected empty context";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyContext);
  }
}

TEST(Attention, ZeroUpstreamGradientGivesZeroGradients) {
  Rng rng = make_rng(3);
  auto p = MhaParams<double>::init({4, 6, 5, 3, 2}, rng);
  MhaCache<double> cache;
  mha_forward(random_matrix(2, 4, rng), random_matrix(5, 6, rng), random_matrix(5, 5, rng), p, cache);
  auto g = zeros_like(p);
  const auto d = mha_backward(cache, p, MatrixD(2, 3), g);
  EXPECT_EQ(squared_norm(d.dq) + squared_norm(d.dk) + squared_norm(d.dv), 0.0);
  for (const auto& [name, t] : tensor_list(std::as_const(g))) EXPECT_EQ(squared_norm(*t), 0.0) << name;
}

TEST(Attention, MaskedKeysReceiveNoGradient) {
  Rng rng = make_rng(4);
  auto p = MhaParams<double>::init({4, 4, 4, 4, 2}, rng);
  MhaCache<double> cache;
  bool keep[4] = {true, false, true, false};
  mha_forward(random_matrix(2, 4, rng), random_matrix(4, 4, rng), random_matrix(4, 4, rng), p, cache,
              std::span<const bool>(keep, 4));
  auto g = zeros_like(p);
  const auto d = mha_backward(cache, p, random_matrix(2, 4, rng), g);
  for (std::size_t j : {1u, 3u})
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(d.dk(j, c), 0.0);
      EXPECT_EQ(d.dv(j, c), 0.0);
    }
}

TEST(Attention, BackwardMatchesFiniteDifferences) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng = make_rng(seed, 2);
    const std::size_t heads = 1 + seed % 3;
    MhaProbe probe{MhaParams<double>::init({6, 5, 4, 3, heads}, rng), random_matrix(2, 6, rng),
                   random_matrix(4, 5, rng), random_matrix(4, 4, rng)};
    const auto w = random_matrix(2, 3, rng);
    auto loss = [&](const MhaProbe& p) {
      MhaCache<double> c;
      return weighted_sum(mha_forward(p.q, p.k, p.v, p.attn, c), w);
    };
    auto loss_grad = [&](const MhaProbe& p, MhaProbe& g) {
      MhaCache<double> c;
      const auto out = mha_forward(p.q, p.k, p.v, p.attn, c);
      auto d = mha_backward(c, p.attn, w, g.attn);
      g.q += d.dq;
      g.k += d.dk;
      g.v += d.dv;
      return weighted_sum(out, w);
    };
    const auto r = grad_check(probe, loss_grad, loss, {.step = 1e-3});
    EXPECT_LT(r.max_error, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

// ---------------------------------------------------------------------------
// GRU

TEST(Gru, ZeroParametersHalveTheState) {
  const auto p = GruParams<double>::zeros(3, 2);
  GruCache<double> c;
  const auto out = gru_step(MatrixD::from_rows({{2, -4}}), MatrixD::from_rows({{1, 1, 1}}), p, c);
  EXPECT_EQ(out, MatrixD::from_rows({{1, -2}}));
}

TEST(Gru, ClosedUpdateGatePassesStateThrough) {
  Rng rng = make_rng(5);
  auto p = GruParams<double>::init(3, 2, rng);
  p.b_z.fill(-1e6);
  GruCache<double> c;
  const auto h = MatrixD::from_rows({{0.7, -0.3}});
  const auto out = gru_step(h, random_matrix(1, 3, rng, 5.0), p, c);
  EXPECT_NEAR(max_abs_diff(out, h), 0.0, 1e-12);
}

TEST(Gru, ShapeMismatch) {
  const auto p = GruParams<double>::zeros(3, 2);
  GruCache<double> c;
  EXPECT_THROW(gru_step(MatrixD(1, 3), MatrixD(1, 3), p, c), Error);
}

TEST(Gru, BackwardMatchesFiniteDifferences) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng = make_rng(seed, 3);
    GruProbe probe{GruParams<double>::init(5, 4, rng), random_matrix(1, 4, rng), random_matrix(1, 5, rng)};
    for (auto* b : {&probe.cell.b_z, &probe.cell.b_r, &probe.cell.b_h}) *b = random_matrix(1, 4, rng, 0.5);
    const auto w = random_matrix(1, 4, rng);
    auto loss = [&](const GruProbe& p) {
      GruCache<double> c;
      return weighted_sum(gru_step(p.h, p.x, p.cell, c), w);
    };
    auto loss_grad = [&](const GruProbe& p, GruProbe& g) {
      GruCache<double> c;
      const auto out = gru_step(p.h, p.x, p.cell, c);
      auto d = gru_backward(c, p.cell, w, g.cell);
      g.h += d.dh;
      g.x += d.dx;
      return weighted_sum(out, w);
    };
    const auto r = grad_check(probe, loss_grad, loss);
    EXPECT_LT(r.max_error, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

// ---------------------------------------------------------------------------
// GLU

TEST(Glu, OpenGateIsAffine) {
  Rng rng = make_rng(6);
  auto p = GluParams<double>::init(3, 2, rng);
  p.value.bias = random_matrix(1, 2, rng);
  p.gate.bias.fill(1e6);
  const auto x = random_matrix(1, 3, rng);
  GluCache<double> c;
  EXPECT_NEAR(max_abs_diff(glu_forward(x, p, c), linear_forward(x, p.value)), 0.0, 1e-12);
}

TEST(Glu, ZeroValueMapGivesZero) {
  Rng rng = make_rng(7);
  auto p = GluParams<double>::init(3, 2, rng);
  p.value = LinearParams<double>::zeros(3, 2);
  GluCache<double> c;
  EXPECT_EQ(glu_forward(random_matrix(1, 3, rng), p, c), MatrixD(1, 2));
}

TEST(Glu, BackwardMatchesFiniteDifferences) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng = make_rng(seed, 4);
    GluProbe probe{GluParams<double>::init(5, 3, rng), random_matrix(1, 5, rng)};
    probe.unit.gate.bias = random_matrix(1, 3, rng);
    const auto w = random_matrix(1, 3, rng);
    auto loss = [&](const GluProbe& p) {
      GluCache<double> c;
      return weighted_sum(glu_forward(p.x, p.unit, c), w);
    };
    auto loss_grad = [&](const GluProbe& p, GluProbe& g) {
      GluCache<double> c;
      const auto out = glu_forward(p.x, p.unit, c);
      g.x += glu_backward(c, p.unit, w, g.unit);
      return weighted_sum(out, w);
    };
    const auto r = grad_check(probe, loss_grad, loss);
    EXPECT_LT(r.max_error, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

// ---------------------------------------------------------------------------
// Adam

struct Scalar {
  using scalar_type = float;
  Matrix w{1, 1};
  template <class F> void visit(F&& f) { f("w", w); }
  template <class F> void visit(F&& f) const { f("w", w); }
};

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Rng rng = make_rng(8);
  auto p = LinearParams<float>::init(4, 3, rng);
  const auto before = p;
  Adam<float> adam;
  adam.step(p, zeros_like(p));
  EXPECT_EQ(adam.steps(), 1);
  EXPECT_EQ(p.weight, before.weight);
  EXPECT_EQ(p.bias, before.bias);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Scalar p, g;
  p.w[0] = 1.0f;
  g.w[0] = 1.0f;
  Adam<float> adam({.learning_rate = 0.1});
  adam.step(p, g);
  EXPECT_NEAR(p.w[0], 0.9f, 1e-6);
}

TEST(Adam, NonFiniteGradientIsDivergence) {
  Scalar p, g;
  g.w[0] = std::nanf("");
  Adam<float> adam;
  try {
    adam.step(p, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Divergence);
    EXPECT_NE(std::string(e.what()).find("w"), std::string::npos);
  }
}

TEST(Adam, IdenticalRunsAreBitIdentical) {
  auto run = [] {
    Rng rng = make_rng(9);
    auto p = LinearParams<float>::init(4, 3, rng);
    Adam<float> adam({.learning_rate = 0.01});
    for (int i = 0; i < 50; ++i) {
      auto g = zeros_like(p);
      for (auto& v : g.weight.flat()) v = static_cast<float>(uniform(rng, -1, 1));
      adam.step(p, g);
    }
    return p;
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.weight, b.weight);
  EXPECT_EQ(a.bias, b.bias);
}

// ---------------------------------------------------------------------------
// checkpoints

TEST(Checkpoint, RoundTripsTensorsAndMeta) {
  Rng rng = make_rng(10);
  auto p = GluParams<float>::init(5, 3, rng);
  const auto dir = acarec::testing::scratch_dir("ckpt");
  save_checkpoint(dir, p, {{"d_e", 3}});
  EXPECT_EQ(read_checkpoint_meta(dir).at("d_e"), 3);
  auto q = GluParams<float>::init(5, 3, rng);
  load_checkpoint(dir, q);
  EXPECT_EQ(q.value.weight, p.value.weight);
  EXPECT_EQ(q.gate.bias, p.gate.bias);

  auto wrong = GluParams<float>::init(4, 3, rng);
  EXPECT_THROW(load_checkpoint(dir, wrong), Error);
}

}  // namespace
}  // namespace acarec::nn
