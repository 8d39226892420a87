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

#include "pixreg/analysis.h"
#include "pixreg/attacks.h"
#include "pixreg/tapnet.h"

namespace {

using namespace pixreg;

std::vector<float> Image(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<float> x(784);
  for (float& v : x) v = u(rng);
  return x;
}

// One boundary-attack run on an untrained desk network; state.range(0) steps.
void BM_BoundaryAttack(benchmark::State& state) {
  const TapNet net = TapNet::Create(Architecture::DeskDefault(1, 28, 28, 10), 5);
  const DecisionFn decide = NetDecision(net, {1, 28, 28});
  const std::vector<float> x = Image(1);
  const int label = decide(x);
  BoundaryOptions opts;
  opts.steps = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t seed = 0, queries = 0;
  for (auto _ : state) {
    const BoundaryResult r = BoundaryAttack(decide, x, label, opts, ++seed);
    queries += r.queries;
    benchmark::DoNotOptimize(r.distance);
  }
  state.counters["queries/run"] =
      benchmark::Counter(static_cast<double>(queries), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_BoundaryAttack)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_FourierPower(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor x({side, side});
  for (float& v : x.data()) v = u(rng);
  for (auto _ : state) {
    Tensor p = FourierPower(x);
    benchmark::DoNotOptimize(p.raw());
  }
}
BENCHMARK(BM_FourierPower)->Arg(28)->Arg(32)->Arg(224);

}  // namespace
