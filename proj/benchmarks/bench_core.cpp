// Copyright 2026 The dsach Authors
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

#include "dsach/hpi.hpp"
#include "dsach/mlp.hpp"
#include "dsach/replay.hpp"
#include "dsach/rng.hpp"

using namespace dsach;

namespace {

nn::GradientVector random_grad(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return nn::GradientVector(std::move(v));
}

// Harmonic solve at actor-sized parameter counts.
void BM_HarmonicSolve(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  hpi::HpiProblem p;
  p.g_r = random_grad(n, rng);
  p.g_c = random_grad(n, rng);
  for (std::size_t i = 0; i < n; ++i) p.g_c[i] -= 0.8 * p.g_r[i];
  p.lambda = 1.0;
  p.rho = 0.9;
  for (auto _ : state) benchmark::DoNotOptimize(hpi::solve_harmonic(p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_HarmonicSolve)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 17);

void BM_MlpForward(benchmark::State& state) {
  Rng rng(2);
  const auto width = static_cast<std::size_t>(state.range(0));
  const nn::Mlp net(nn::MlpSpec::make(95, {width, width}, 2));
  const auto theta = net.init(rng);
  const nn::Matrix x = nn::Matrix::Random(95, 256);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(theta, x));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_MlpForward)->Arg(64)->Arg(256);

void BM_ReplaySample(benchmark::State& state) {
  Rng rng(3);
  replay::HierarchicalBuffer buf;
  for (int i = 0; i < 100000; ++i) {
    replay::Transition t;
    t.obs.assign(93, 0.0);
    t.next_obs.assign(93, 0.0);
    t.action = {0.0, 0.0};
    t.event = static_cast<replay::EventType>(i % replay::kNumEventTypes);
    t.priority = rng.exponential(1.0);
    buf.push(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample(256, rng));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_ReplaySample);

}  // namespace
BENCHMARK_MAIN();
