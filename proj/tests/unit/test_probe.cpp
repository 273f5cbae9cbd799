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

#include "eve/probe.hpp"
#include "eve/rng.hpp"

namespace eve {
namespace {

using M = nn::Matrix<double>;

struct Toy {
  M x;
  std::vector<EditExample> ex;
};

Toy make_toy(std::size_t n, std::uint64_t seed, const std::function<std::string(double, double, Rng&)>& label) {
  Rng rng(seed);
  Toy t;
  t.x.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    t.x(static_cast<Eigen::Index>(i), 0) = a;
    t.x(static_cast<Eigen::Index>(i), 1) = b;
    t.ex.push_back({{"s"}, {"t"}, {label(a, b, rng)}});
  }
  return t;
}

ProbeData toy_data(const std::function<std::string(double, double, Rng&)>& label) {
  const Toy tr = make_toy(800, 1, label), va = make_toy(200, 2, label), te = make_toy(400, 3, label);
  return make_probe_data(tr.x, tr.ex, va.x, va.ex, te.x, te.ex, ProbeMode::Multiclass);
}

ProbeConfig config(int depth, int hidden = 16) {
  ProbeConfig c;
  c.depth = depth;
  c.hidden = hidden;
  c.epochs = 60;
  c.patience = 10;
  c.lr = 1e-2;
  c.batch_size = 32;
  return c;
}

TEST(Probe, LinearlySeparableAtDepthZero) {
  auto label = [](double a, double b, Rng&) { return a + 0.5 * b > 0 ? std::string("pos") : std::string("neg"); };
  const ProbeData d = toy_data(label);
  EXPECT_EQ(d.label_names, (std::vector<std::string>{"neg", "pos"}));
  const ProbeResult r = train_probe(d, config(0));
  EXPECT_GE(r.test_accuracy, 0.99);
  EXPECT_GE(r.train_accuracy, 0.99);
}

TEST(Probe, XorNeedsAHiddenLayer) {
  auto label = [](double a, double b, Rng&) { return (a > 0) != (b > 0) ? std::string("x") : std::string("o"); };
  const ProbeData d = toy_data(label);
  const ProbeResult linear = train_probe(d, config(0));
  const ProbeResult mlp = train_probe(d, config(1, 8));
  EXPECT_NEAR(linear.test_accuracy, 0.5, 0.15);
  EXPECT_GT(mlp.test_accuracy, 0.95);
}

TEST(Probe, RandomLabelsAtChance) {
  auto label = [](double, double, Rng& r) { return std::string(1, static_cast<char>('a' + r.uniform_int(0, 4))); };
  const ProbeData d = toy_data(label);
  EXPECT_EQ(d.label_names.size(), 5u);
  const ProbeResult r = train_probe(d, config(1));
  EXPECT_NEAR(r.test_accuracy, 0.2, 0.05);
}

TEST(Probe, Deterministic) {
  auto label = [](double a, double b, Rng&) { return a * b > 0 ? std::string("x") : std::string("o"); };
  const ProbeData d = toy_data(label);
  const ProbeResult a = train_probe(d, config(1)), b = train_probe(d, config(1));
  EXPECT_EQ(a.to_json(), b.to_json());
}

TEST(Probe, InvariantToFeatureScaling) {
  auto label = [](double a, double b, Rng&) { return a - b > 0.2 ? std::string("x") : std::string("o"); };
  ProbeData d = toy_data(label);
  const ProbeResult a = train_probe(d, config(1));
  for (ProbeSplit* s : {&d.train, &d.valid, &d.test}) s->x = (s->x.array() * 1000.0 + 7.0).matrix();
  const ProbeResult b = train_probe(d, config(1));
  EXPECT_NEAR(a.test_accuracy, b.test_accuracy, 1e-9);
}

TEST(Probe, LabelErrors) {
  const M x = M::Zero(2, 2);
  const std::vector<EditExample> one = {{{"a"}, {"b"}, {"only"}}, {{"a"}, {"c"}, {"only"}}};
  const ProbeData d = make_probe_data(x, one, x, one, x, one, ProbeMode::Multiclass);
  EXPECT_THROW(train_probe(d, config(0)), LabelError);
  const std::vector<EditExample> unlabeled = {{{"a"}, {"b"}, {}}, {{"a"}, {"c"}, {"x"}}};
  EXPECT_THROW(make_probe_data(x, unlabeled, x, one, x, one, ProbeMode::Multiclass), LabelError);
  const std::vector<EditExample> multi = {{{"a"}, {"b"}, {"x", "y"}}, {{"a"}, {"c"}, {"x"}}};
  EXPECT_THROW(make_probe_data(x, multi, x, one, x, one, ProbeMode::Multiclass), LabelError);
  EXPECT_NO_THROW(make_probe_data(x, multi, x, one, x, one, ProbeMode::Multilabel));
  EXPECT_THROW(make_probe_data(M::Zero(3, 2), one, x, one, x, one, ProbeMode::Multiclass), DimensionError);
}

TEST(Probe, MultilabelExactSetMatch) {
  auto build = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Toy t;
    t.x.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
      t.x.row(static_cast<Eigen::Index>(i)) << a, b;
      std::vector<std::string> ls;
      if (a > 0) ls.push_back("A");
      if (b > 0) ls.push_back("B");
      if (ls.empty()) ls.push_back("none");
      t.ex.push_back({{"s"}, {"t"}, ls});
    }
    return t;
  };
  const Toy tr = build(800, 4), va = build(200, 5), te = build(400, 6);
  const ProbeData d = make_probe_data(tr.x, tr.ex, va.x, va.ex, te.x, te.ex, ProbeMode::Multilabel);
  ProbeConfig c = config(1);
  c.mode = ProbeMode::Multilabel;
  const ProbeResult r = train_probe(d, c);
  EXPECT_GT(r.test_accuracy, 0.9);
  ASSERT_EQ(r.label_f1.size(), 3u);
  for (double f : r.label_f1) EXPECT_GT(f, 0.9);
}

TEST(DepthSweep, CurveAndSvg) {
  auto label = [](double a, double b, Rng&) { return (a > 0) != (b > 0) ? std::string("x") : std::string("o"); };
  const ProbeData d = toy_data(label);
  const std::vector<int> depths = {0, 1, 2};
  const DepthSweep s = depth_sweep(d, depths, config(0, 8));
  ASSERT_EQ(s.results.size(), 3u);
  double best = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.results[i].depth, depths[i]);
    best = std::max(best, s.results[i].test_accuracy);
  }
  EXPECT_GE(best, s.results[0].test_accuracy);
  const nlohmann::json j = s.to_json();
  EXPECT_EQ(j.at("curve").size(), 3u);
  const std::string svg = render_depth_svg(s, "toy");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_THROW(depth_sweep(d, std::vector<int>{}, config(0)), Error);
}

TEST(ProbeConfig, Validation) {
  ProbeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.depth = -1;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_probe_mode("multilabel"), ProbeMode::Multilabel);
  EXPECT_THROW(parse_probe_mode("ranking"), Error);
}

}  // namespace
}  // namespace eve
