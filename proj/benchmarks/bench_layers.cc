// Copyright 2026 The pixreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <random>

#include "pixreg/layers.h"
#include "pixreg/tapnet.h"

namespace {

using namespace pixreg;
using namespace pixreg::ops;

Tensor Random(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor t(std::move(shape));
  for (float& v : t.data()) v = u(rng);
  return t;
}

// args: batch, in channels, out channels, side
void BM_ConvForward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0)), cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2)), side = static_cast<std::size_t>(state.range(3));
  const Tensor x = Random({b, cin, side, side}, 1), w = Random({cout, cin, 3, 3}, 2), bias = Random({cout}, 3);
  for (auto _ : state) {
    Tape tape(Tape::Mode::kInference);
    Var y = Conv2d(tape.Constant(x), tape.Constant(w), tape.Constant(bias), 1, 1);
    benchmark::DoNotOptimize(y.value().raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_ConvForward)->Args({64, 1, 16, 28})->Args({64, 16, 32, 28})->Args({64, 32, 64, 14});

void BM_ConvBackward(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0)), cin = static_cast<std::size_t>(state.range(1));
  const auto cout = static_cast<std::size_t>(state.range(2)), side = static_cast<std::size_t>(state.range(3));
  const Tensor x = Random({b, cin, side, side}, 1), w = Random({cout, cin, 3, 3}, 2), bias = Random({cout}, 3);
  for (auto _ : state) {
    Tape tape;
    Var xi = tape.Input(x);
    Var y = Conv2d(xi, tape.Input(w), tape.Input(bias), 1, 1);
    // Sum of the output as the scalar loss.
    Var loss = tape.Record(Tensor({1}, 0.0f), {y}, [&](const Tensor& g, std::span<Tensor* const> in) {
      if (!in[0]) return;
      for (std::size_t k = 0; k < in[0]->size(); ++k) (*in[0])[k] += g[0];
    });
    tape.Backward(loss);
    benchmark::DoNotOptimize(tape.Grad(xi).raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_ConvBackward)->Args({64, 1, 16, 28})->Args({64, 16, 32, 28})->Args({64, 32, 64, 14});

void BM_DeskNetTrainStep(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  TapNet net = TapNet::Create(Architecture::DeskDefault(1, 28, 28, 10), 7);
  const Tensor x = Random({b, 1, 28, 28}, 4);
  std::vector<int> labels(b);
  for (std::size_t i = 0; i < b; ++i) labels[i] = static_cast<int>(i % 10);
  for (auto _ : state) {
    Tape tape;
    const TapOutputs out = net.Forward(tape, tape.Constant(x));
    GradientMap grads = tape.Backward(SoftmaxCrossEntropy(out.logits, labels));
    benchmark::DoNotOptimize(grads.entries().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b));
}
BENCHMARK(BM_DeskNetTrainStep)->Arg(64);

}  // namespace
