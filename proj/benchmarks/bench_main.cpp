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

#include <benchmark/benchmark.h>

#include "eve/alignment.hpp"
#include "eve/corpus.hpp"
#include "eve/model.hpp"
#include "eve/numeric/layers.hpp"
#include "eve/numeric/optim.hpp"
#include "eve/training.hpp"

namespace {

using namespace eve;

void BM_Align(benchmark::State& state) {
  Rng rng(1);
  const auto len = static_cast<std::size_t>(state.range(0));
  TokenSeq a(len), b(len);
  for (auto& t : a) t = std::string(1, static_cast<char>('a' + rng.uniform_int(0, 5)));
  for (auto& t : b) t = std::string(1, static_cast<char>('a' + rng.uniform_int(0, 5)));
  for (auto _ : state) benchmark::DoNotOptimize(align(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Align)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNSquared);

void BM_LstmStep(benchmark::State& state) {
  const auto rows = state.range(0);
  Rng rng(2);
  nn::ParameterStore<float> store;
  const nn::Lstm<float> lstm(store, "lstm", 64, 128, rng);
  const nn::Matrix<float> x = nn::Matrix<float>::Random(rows, 64);
  for (auto _ : state) {
    nn::Graph<float> g(false);
    auto s = lstm.step(g, lstm.zero_state(g, rows), g.constant(x));
    benchmark::DoNotOptimize(s.h.value().data());
  }
}
BENCHMARK(BM_LstmStep)->Arg(1)->Arg(64);

void BM_TrainStep(benchmark::State& state) {
  const std::vector<EditExample> ex = gen_synthetic(64, kAllRuleClasses, 3);
  ModelConfig config;
  EveModel<float> model(config, build_vocab(ex, Side::Source, 1), build_vocab(ex, Side::Target, 1), 1);
  const PreparedBatch batch = prepare_batch(model.src_vocab(), model.tgt_vocab(), ex, align_all(ex));
  nn::Adam<float> adam;
  Rng noise(4);
  LossOptions opts;
  opts.beta = 0.1;
  opts.noise = &noise;
  for (auto _ : state) {
    model.params().zero_grad();
    nn::Graph<float> g;
    const LossTerms<float> t = compute_loss(model, g, batch, opts);
    g.backward(t.total);
    adam.step(model.params().parameters());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
