// Copyright 2026 The EVE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eve/error.hpp"
#include "eve/numeric/gradcheck.hpp"
#include "eve/numeric/graph.hpp"
#include "eve/numeric/layers.hpp"
#include "eve/numeric/optim.hpp"

namespace eve::nn {
namespace {

using M = Matrix<double>;
using V = Var<double>;
using G = Graph<double>;

M random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  M m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
  return m;
}

/// sum(out * R) for a fixed random R, so every output coordinate matters.
V weighted_sum(G& g, V out, Rng& rng) {
  return sum(mul(out, g.constant(random_matrix(out.rows(), out.cols(), rng))));
}

Parameter<double>& add_param(ParameterStore<double>& s, const std::string& name, M value) {
  Rng dummy(0);
  Parameter<double>& p = s.add(name, value.rows(), value.cols(), constant_init<double>(0.0), dummy);
  p.value = std::move(value);
  return p;
}

// ---------------------------------------------------------------------------

TEST(GradCheck, HalfSquaredNormIsExact) {
  ParameterStore<double> s;
  Rng rng(1);
  Parameter<double>& x = add_param(s, "x", random_matrix(3, 4, rng));
  const GradCheckResult r = grad_check([&](G& g) { return scale(sum(square(g.param(x))), 0.5); },
                                       s.parameters(), 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(r.coordinates, 12u);
}

TEST(GradCheck, LinearSoftmaxCrossEntropyToy) {
  ParameterStore<double> s;
  Rng rng(2);
  Linear<double> lin(s, "lin", 4, 3, rng);
  const M x = random_matrix(5, 4, rng);
  const std::vector<SparseTarget> targets = {{0, 1}, {1, 0}, {2, 2}, {3, 1}, {4, 0}};
  const GradCheckResult r = grad_check(
      [&](G& g) { return softmax_cross_entropy(lin(g, g.constant(x)), targets); }, s.parameters());
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(GradCheck, NonFiniteObjectiveThrows) {
  ParameterStore<double> s;
  Parameter<double>& x = add_param(s, "x", M::Constant(1, 1, 1.0));
  EXPECT_THROW(grad_check([&](G& g) { return scale(sum(g.param(x)), std::nan("")); }, s.parameters()),
               NonFiniteError);
}

// Per-layer checks over 50 random instances each.
class LayerGrad : public ::testing::TestWithParam<int> {};

TEST_P(LayerGrad, Linear) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  Linear<double> lin(s, "lin", 3, 4, rng);
  Parameter<double>& x = add_param(s, "x", random_matrix(2, 3, rng));
  Rng w(GetParam() + 1000);
  const M r = random_matrix(2, 4, w);
  EXPECT_LT(grad_check([&](G& g) { return sum(mul(lin(g, g.param(x)), g.constant(r))); }, s.parameters())
                .max_rel_error,
            1e-6);
}

TEST_P(LayerGrad, Embedding) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  Embedding<double> emb(s, "emb", 6, 3, rng);
  const std::vector<int> ids = {1, 4, 1, 0};
  const M r = random_matrix(4, 3, rng);
  EXPECT_LT(grad_check([&](G& g) { return sum(mul(emb(g, ids), g.constant(r))); }, s.parameters())
                .max_rel_error,
            1e-6);
}

TEST_P(LayerGrad, LstmSequence) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 3, 4, rng);
  Parameter<double>& x = add_param(s, "x", random_matrix(6, 3, rng));
  const M r = random_matrix(2, 4, rng);
  auto f = [&](G& g) {
    LstmState<double> st = cell.zero_state(g, 2);
    const V xs = g.param(x);
    for (int t = 0; t < 3; ++t) st = cell.step(g, st, slice_rows(xs, 2 * t, 2));
    return add(sum(mul(st.h, g.constant(r))), scale(sum(st.c), 0.3));
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

TEST_P(LayerGrad, BiLstmRagged) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  BiLstm<double> enc(s, "enc", 2, 3, rng);
  Parameter<double>& x = add_param(s, "x", random_matrix(8, 2, rng));
  const std::vector<int> lengths = {4, 2};
  const M r = random_matrix(2, 6, rng);
  const M ra = random_matrix(2, 6, rng);
  auto f = [&](G& g) {
    const V xs = g.param(x);
    std::vector<V> steps;
    for (int t = 0; t < 4; ++t) steps.push_back(slice_rows(xs, 2 * t, 2));
    const BiLstmOutput<double> out = enc.encode(g, steps, lengths);
    return add(sum(mul(out.final, g.constant(r))), sum(mul(out.annotations[1], g.constant(ra))));
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

TEST_P(LayerGrad, GeneralAttention) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  GeneralAttention<double> att(s, "att", 3, 4, rng);
  Parameter<double>& q = add_param(s, "q", random_matrix(3, 3, rng));
  Parameter<double>& mem = add_param(s, "mem", random_matrix(6, 4, rng));  // 3 steps x 2 sources
  const std::vector<int> lengths = {3, 2};
  const std::vector<int> src_of_row = {0, 1, 1};
  const M r = random_matrix(3, 4, rng);
  const M rw = random_matrix(3, 3, rng);
  auto f = [&](G& g) {
    const V m = g.param(mem);
    const AttentionResult<double> a = att.attend(g, g.param(q), att.keys(g, m), m, lengths, src_of_row);
    return add(sum(mul(a.context, g.constant(r))), sum(mul(a.weights, g.constant(rw))));
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

TEST_P(LayerGrad, SoftmaxFamily) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  Parameter<double>& x = add_param(s, "x", random_matrix(3, 5, rng, 2.0));
  const M r = random_matrix(3, 5, rng);
  M targets(3, 5);
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const std::vector<SparseTarget> sparse = {{0, 2, 1.0}, {1, 4, 0.5}, {2, 0, 2.0}};
  auto f = [&](G& g) {
    const V v = g.param(x);
    return add(add(sum(mul(softmax(v), g.constant(r))), sum(mul(log_softmax(v), g.constant(r)))),
               add(softmax_cross_entropy(v, sparse), sigmoid_cross_entropy(v, targets)));
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

TEST_P(LayerGrad, ElementwiseOps) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  M init = random_matrix(2, 4, rng, 2.0);
  for (Eigen::Index i = 0; i < init.size(); ++i)
    if (std::abs(init.data()[i]) < 0.05) init.data()[i] = 0.5;  // away from relu/abs kinks
  Parameter<double>& x = add_param(s, "x", init);
  Parameter<double>& y = add_param(s, "y", random_matrix(2, 4, rng));
  Parameter<double>& row = add_param(s, "row", random_matrix(1, 4, rng));
  Parameter<double>& col = add_param(s, "col", random_matrix(2, 1, rng));
  auto f = [&](G& g) {
    Rng w(GetParam() + 77);
    const V a = g.param(x);
    const V b = g.param(y);
    const V pos = shift(square(a), 0.5);
    V acc = weighted_sum(g, sigmoid(a), w);
    acc = add(acc, weighted_sum(g, tanh(mul(a, b)), w));
    acc = add(acc, weighted_sum(g, relu(a), w));
    acc = add(acc, weighted_sum(g, exp(scale(b, 0.5)), w));
    acc = add(acc, weighted_sum(g, sqrt(pos), w));
    acc = add(acc, weighted_sum(g, reciprocal(pos), w));
    acc = add(acc, weighted_sum(g, clamp(a, -1.5, 1.5), w));
    acc = add(acc, weighted_sum(g, sub(a, b), w));
    acc = add(acc, weighted_sum(g, add_row(b, g.param(row)), w));
    acc = add(acc, weighted_sum(g, mul_col(a, g.param(col)), w));
    acc = add(acc, weighted_sum(g, matmul(a, g.constant(random_matrix(4, 3, w))), w));
    acc = add(acc, weighted_sum(g, row_sum(a), w));
    acc = add(acc, weighted_sum(g, row_dot(a, b), w));
    acc = add(acc, weighted_sum(g, row_norm(b), w));
    return acc;
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

TEST_P(LayerGrad, StructuralOps) {
  Rng rng(GetParam());
  ParameterStore<double> s;
  Parameter<double>& x = add_param(s, "x", random_matrix(2, 3, rng));
  Parameter<double>& y = add_param(s, "y", random_matrix(2, 2, rng));
  const std::vector<double> mask = {1.0, 0.0};
  const std::vector<int> pick = {1, 0};
  auto f = [&](G& g) {
    Rng w(GetParam() + 5);
    const V a = g.param(x);
    const V b = g.param(y);
    const V cat = concat_cols({a, b});
    V acc = weighted_sum(g, cat, w);
    acc = add(acc, weighted_sum(g, slice_cols(cat, 1, 3), w));
    const std::vector<V> parts = {a, tanh(a)};
    acc = add(acc, weighted_sum(g, vstack<double>(parts), w));
    acc = add(acc, weighted_sum(g, blend<double>(mask, a, tanh(a)), w));
    acc = add(acc, weighted_sum(g, gather_steps<double>(parts, pick), w));
    return acc;
  };
  EXPECT_LT(grad_check(f, s.parameters()).max_rel_error, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LayerGrad, ::testing::Range(1, 51));

// ---------------------------------------------------------------------------

double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

TEST(Lstm, MatchesScalarLoopOracle) {
  Rng rng(42);
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 3, 3, rng);
  for (Parameter<double>* p : s.parameters()) p->value = random_matrix(p->value.rows(), p->value.cols(), rng);
  const M x0 = random_matrix(1, 3, rng);
  const M x1 = random_matrix(1, 3, rng);

  G g(false);
  LstmState<double> st = cell.zero_state(g, 1);
  st = cell.step(g, st, g.constant(x0));
  st = cell.step(g, st, g.constant(x1));

  const M& W = cell.weight().value;
  const M& b = cell.bias().value;
  double h[3] = {0, 0, 0}, c[3] = {0, 0, 0};
  for (const M* x : {&x0, &x1}) {
    double in[6];
    for (int k = 0; k < 3; ++k) in[k] = (*x)(0, k);
    for (int k = 0; k < 3; ++k) in[3 + k] = h[k];
    double z[12];
    for (int r = 0; r < 12; ++r) {
      z[r] = b(0, r);
      for (int k = 0; k < 6; ++k) z[r] += W(r, k) * in[k];
    }
    for (int k = 0; k < 3; ++k) {
      const double ig = sigm(z[k]), fg = sigm(z[3 + k]), cg = std::tanh(z[6 + k]), og = sigm(z[9 + k]);
      c[k] = fg * c[k] + ig * cg;
      h[k] = og * std::tanh(c[k]);
    }
  }
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(st.h.value()(0, k), h[k], 1e-12);
    EXPECT_NEAR(st.c.value()(0, k), c[k], 1e-12);
  }
}

TEST(Lstm, ZeroWeightsGiveZeroHidden) {
  Rng rng(1);
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 2, 3, rng);
  cell.weight().value.setZero();
  cell.bias().value.setZero();
  G g(false);
  const LstmState<double> st = cell.step(g, cell.zero_state(g, 1), g.constant(random_matrix(1, 2, rng)));
  EXPECT_EQ(st.h.value().norm(), 0.0);
}

TEST(Lstm, SaturatedForgetGateCarriesCell) {
  Rng rng(1);
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 2, 3, rng);
  cell.weight().value.setZero();
  cell.bias().value.setZero();
  cell.bias().value.block(0, 3, 1, 3).setConstant(1e3);
  G g(false);
  const M c0 = random_matrix(1, 3, rng);
  const LstmState<double> st = cell.step(g, {g.constant(M::Zero(1, 3)), g.constant(c0)},
                                         g.constant(random_matrix(1, 2, rng)));
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(st.c.value()(0, k), c0(0, k));
}

TEST(Lstm, ForgetBiasInitialisedToOne) {
  Rng rng(3);
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 2, 4, rng);
  for (int k = 0; k < 16; ++k) EXPECT_EQ(cell.bias().value(0, k), (k >= 4 && k < 8) ? 1.0 : 0.0);
}

TEST(Lstm, InputWidthChecked) {
  Rng rng(3);
  ParameterStore<double> s;
  Lstm<double> cell(s, "cell", 2, 4, rng);
  G g;
  EXPECT_THROW(cell.step(g, cell.zero_state(g, 1), g.constant(M::Zero(1, 3))), DimensionError);
}

TEST(BiLstm, AnnotationCountAndWidth) {
  Rng rng(5);
  ParameterStore<double> s;
  BiLstm<double> enc(s, "enc", 2, 3, rng);
  for (int len : {1, 4}) {
    G g(false);
    std::vector<V> steps;
    for (int t = 0; t < len; ++t) steps.push_back(g.constant(random_matrix(1, 2, rng)));
    const std::vector<int> lengths = {len};
    const BiLstmOutput<double> out = enc.encode(g, steps, lengths);
    EXPECT_EQ(static_cast<int>(out.annotations.size()), len);
    EXPECT_EQ(out.final.cols(), 6);
    EXPECT_EQ(out.final.value(), out.annotations.back().value());
  }
  G g;
  EXPECT_THROW(enc.encode(g, std::vector<V>{}, std::vector<int>{}), DimensionError);
}

TEST(BiLstm, PalindromeWithTiedWeightsIsHalfSwapSymmetric) {
  Rng rng(8);
  ParameterStore<double> s;
  BiLstm<double> enc(s, "enc", 2, 3, rng);
  Parameter<double>& fw = s.get("enc.fwd.weight");
  Parameter<double>& bw = s.get("enc.bwd.weight");
  bw.value = fw.value;
  s.get("enc.bwd.bias").value = s.get("enc.fwd.bias").value;
  const std::vector<M> xs = {random_matrix(1, 2, rng), random_matrix(1, 2, rng), random_matrix(1, 2, rng)};
  G g(false);
  const std::vector<V> steps = {g.constant(xs[0]), g.constant(xs[1]), g.constant(xs[2]), g.constant(xs[1]),
                                g.constant(xs[0])};
  const std::vector<int> lengths = {5};
  const BiLstmOutput<double> out = enc.encode(g, steps, lengths);
  for (int t = 0; t < 5; ++t) {
    const M& a = out.annotations[t].value();
    const M& b = out.annotations[4 - t].value();
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(a(0, k), b(0, 3 + k), 1e-14);
      EXPECT_NEAR(a(0, 3 + k), b(0, k), 1e-14);
    }
  }
}

TEST(BiLstm, RaggedRowMatchesUnpaddedRun) {
  Rng rng(9);
  ParameterStore<double> s;
  BiLstm<double> enc(s, "enc", 2, 3, rng);
  const M x = random_matrix(8, 2, rng);
  G g(false);
  std::vector<V> both, alone;
  for (int t = 0; t < 4; ++t) both.push_back(g.constant(x.block(2 * t, 0, 2, 2)));
  for (int t = 0; t < 2; ++t) alone.push_back(g.constant(x.block(2 * t + 1, 0, 1, 2)));
  const std::vector<int> l2 = {4, 2}, l1 = {2};
  const BiLstmOutput<double> a = enc.encode(g, both, l2);
  const BiLstmOutput<double> b = enc.encode(g, alone, l1);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(a.final.value()(1, k), b.final.value()(0, k), 1e-14);
}

TEST(Attention, SingleAnnotation) {
  Rng rng(1);
  ParameterStore<double> s;
  GeneralAttention<double> att(s, "att", 2, 2, rng);
  G g(false);
  const M mem = random_matrix(1, 2, rng);
  const V m = g.constant(mem);
  const std::vector<int> lengths = {1}, rows = {0};
  const auto r = att.attend(g, g.constant(random_matrix(1, 2, rng)), att.keys(g, m), m, lengths, rows);
  EXPECT_DOUBLE_EQ(r.weights.value()(0, 0), 1.0);
  EXPECT_EQ(r.context.value(), mem);
}

TEST(Attention, IdenticalAnnotationsSplitEvenly) {
  Rng rng(2);
  ParameterStore<double> s;
  GeneralAttention<double> att(s, "att", 2, 2, rng);
  G g(false);
  const M row = random_matrix(1, 2, rng);
  M mem(2, 2);
  mem << row, row;
  const V m = g.constant(mem);
  const std::vector<int> lengths = {2}, rows = {0};
  const auto r = att.attend(g, g.constant(random_matrix(1, 2, rng)), att.keys(g, m), m, lengths, rows);
  EXPECT_DOUBLE_EQ(r.weights.value()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.weights.value()(0, 1), 0.5);
}

TEST(Attention, IdentityWeightMatchesHandSoftmax) {
  Rng rng(3);
  ParameterStore<double> s;
  GeneralAttention<double> att(s, "att", 2, 2, rng);
  att.weight().value = M::Identity(2, 2);
  M mem(3, 2);
  mem << 1.0, 0.0, 0.0, 2.0, -1.0, 1.0;
  M q(1, 2);
  q << 0.5, -0.25;
  // scores q.a: 0.5, -0.5, -0.75
  const double e0 = std::exp(0.5), e1 = std::exp(-0.5), e2 = std::exp(-0.75);
  const double z = e0 + e1 + e2;
  G g(false);
  const V m = g.constant(mem);
  const std::vector<int> lengths = {3}, rows = {0};
  const auto r = att.attend(g, g.constant(q), att.keys(g, m), m, lengths, rows);
  EXPECT_NEAR(r.weights.value()(0, 0), e0 / z, 1e-12);
  EXPECT_NEAR(r.weights.value()(0, 1), e1 / z, 1e-12);
  EXPECT_NEAR(r.weights.value()(0, 2), e2 / z, 1e-12);
  EXPECT_NEAR(r.context.value()(0, 0), (e0 - e2) / z, 1e-12);
  EXPECT_NEAR(r.context.value()(0, 1), (2 * e1 + e2) / z, 1e-12);
}

TEST(Attention, MaskedStepsGetZeroWeight) {
  Rng rng(4);
  ParameterStore<double> s;
  GeneralAttention<double> att(s, "att", 2, 2, rng);
  G g(false);
  const V m = g.constant(random_matrix(6, 2, rng));  // 3 steps x 2 sources
  const std::vector<int> lengths = {3, 1}, rows = {1};
  const auto r = att.attend(g, g.constant(random_matrix(1, 2, rng)), att.keys(g, m), m, lengths, rows);
  EXPECT_DOUBLE_EQ(r.weights.value()(0, 0), 1.0);
  EXPECT_EQ(r.weights.value()(0, 1), 0.0);
  EXPECT_EQ(r.weights.value()(0, 2), 0.0);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const M x = random_matrix(3, 7, rng, 5.0);
    G g(false);
    const M p = softmax(g.constant(x)).value();
    const M q = softmax(g.constant((x.array() + rng.uniform(-100, 100)).matrix())).value();
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-9);
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Softmax, LogSoftmaxConsistentAndStable) {
  Rng rng(7);
  const M x = random_matrix(2, 5, rng, 3.0);
  G g(false);
  const M lp = log_softmax(g.constant(x)).value();
  const M p = softmax(g.constant(x)).value();
  EXPECT_LT((lp - p.array().log().matrix()).cwiseAbs().maxCoeff(), 1e-9);
  M extreme(1, 3);
  extreme << 1e4, -1e4, 0.0;
  const M le = log_softmax(g.constant(extreme)).value();
  EXPECT_TRUE(le.allFinite());
  EXPECT_NEAR(le(0, 0), 0.0, 1e-12);
}

TEST(Graph, DeterministicForward) {
  auto run = [] {
    Rng rng(10);
    ParameterStore<double> s;
    Lstm<double> cell(s, "cell", 3, 4, rng);
    G g(false);
    return cell.step(g, cell.zero_state(g, 2), g.constant(random_matrix(2, 3, rng))).h.value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Graph, NonRecordingGraphKeepsValues) {
  Rng rng(11);
  ParameterStore<double> s;
  Linear<double> lin(s, "lin", 2, 2, rng);
  G rec, plain(false);
  const M x = random_matrix(3, 2, rng);
  EXPECT_EQ(lin(rec, rec.constant(x)).value(), lin(plain, plain.constant(x)).value());
}

TEST(Parameters, UniqueNamesAndInitRange) {
  Rng rng(12);
  ParameterStore<double> s;
  Linear<double> lin(s, "lin", 16, 8, rng);
  EXPECT_THROW(s.add("lin.weight", 1, 1, constant_init<double>(), rng), Error);
  EXPECT_THROW(s.get("missing"), Error);
  EXPECT_LE(lin.weight().value.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_EQ(lin.bias()->value.norm(), 0.0);
  EXPECT_EQ(s.coordinates(), 16u * 8u + 8u);
}

TEST(Adam, MatchesHandUpdate) {
  ParameterStore<double> s;
  Parameter<double>& p = add_param(s, "p", M::Constant(1, 2, 1.0));
  p.grad = M::Zero(1, 2);
  Adam<double> adam({0.1, 0.9, 0.999, 1e-8});
  const double grads[2][2] = {{0.5, -2.0}, {0.1, 1.0}};
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {1, 1};
  for (int t = 1; t <= 2; ++t) {
    p.grad << grads[t - 1][0], grads[t - 1][1];
    adam.step(s.parameters());
    for (int k = 0; k < 2; ++k) {
      const double gk = grads[t - 1][k];
      m[k] = 0.9 * m[k] + 0.1 * gk;
      v[k] = 0.999 * v[k] + 0.001 * gk * gk;
      const double mh = m[k] / (1 - std::pow(0.9, t)), vh = v[k] / (1 - std::pow(0.999, t));
      x[k] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  EXPECT_NEAR(p.value(0, 0), x[0], 1e-12);
  EXPECT_NEAR(p.value(0, 1), x[1], 1e-12);
  EXPECT_EQ(adam.steps(), 2);
}

TEST(Adam, ForgetDropsMoments) {
  ParameterStore<double> s;
  Parameter<double>& a = add_param(s, "dec.a", M::Constant(1, 1, 1.0));
  Parameter<double>& b = add_param(s, "enc.b", M::Constant(1, 1, 1.0));
  a.grad = b.grad = M::Constant(1, 1, 1.0);
  Adam<double> adam;
  adam.step(s.parameters());
  adam.forget("dec.");
  EXPECT_EQ(adam.moments().count("dec.a"), 0u);
  EXPECT_EQ(adam.moments().count("enc.b"), 1u);
}

TEST(Clip, GlobalNorm) {
  ParameterStore<double> s;
  Parameter<double>& a = add_param(s, "a", M::Zero(1, 2));
  Parameter<double>& b = add_param(s, "b", M::Zero(1, 1));
  a.grad = M(1, 2);
  a.grad << 3.0, 0.0;
  b.grad = M::Constant(1, 1, 4.0);
  EXPECT_DOUBLE_EQ(global_grad_norm<double>(s.parameters()), 5.0);
  EXPECT_DOUBLE_EQ(clip_global_norm<double>(s.parameters(), 1.0), 5.0);
  EXPECT_NEAR(global_grad_norm<double>(s.parameters()), 1.0, 1e-12);
  EXPECT_NEAR(a.grad(0, 0), 0.6, 1e-12);
  clip_global_norm<double>(s.parameters(), 10.0);
  EXPECT_NEAR(b.grad(0, 0), 0.8, 1e-12);
}

}  // namespace
}  // namespace eve::nn
