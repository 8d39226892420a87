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

#include "pixreg/sim_loss.h"
#include "pixreg/similarity.h"
#include "pixreg/target.h"

namespace {

using namespace pixreg;

Tensor Images(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor t({n, 1, 28, 28});
  for (float& v : t.data()) v = u(rng);
  return t;
}

void BM_PixelSimilarityTriangle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor imgs = Images(n, 1);
  for (auto _ : state) {
    std::vector<float> tri = PixelSimilarityTriangle(imgs);
    benchmark::DoNotOptimize(tri.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(PairCount(n)));
}
BENCHMARK(BM_PixelSimilarityTriangle)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildTarget(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor imgs = Images(n, 2);
  for (auto _ : state) {
    SimilarityTarget t = BuildTargetFromImages(imgs, {TargetMode::kThreshold, 0.2, 0.0, 1e-6});
    benchmark::DoNotOptimize(t.triangle().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(PairCount(n)));
}
BENCHMARK(BM_BuildTarget)->Arg(1000)->Unit(benchmark::kMillisecond);

// Pair cosine plus the pair loss, forward and backward, on tap-sized features.
void BM_PairLossStep(benchmark::State& state) {
  const auto pairs = static_cast<std::size_t>(state.range(0));
  const std::size_t rows = 2 * pairs, features = 16 * 28 * 28;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> z;
  Tensor f({rows, features});
  for (float& v : f.data()) v = z(rng);
  std::vector<IndexPair> idx;
  std::vector<float> target;
  for (std::size_t p = 0; p < pairs; ++p) {
    idx.emplace_back(2 * p, 2 * p + 1);
    target.push_back(p % 2 ? 0.5f : -0.5f);
  }
  for (auto _ : state) {
    Tape tape;
    Var x = tape.Input(f);
    Var loss = SimLossPairs(PairCosine(x, idx), target, 1e-6);
    tape.Backward(loss);
    benchmark::DoNotOptimize(tape.Grad(x).raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs));
}
BENCHMARK(BM_PairLossStep)->Arg(16)->Arg(64);

}  // namespace
