// Copyright 2026 The MoNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "monet/model_head.hpp"
#include "monet/moment_layers.hpp"
#include "monet/numkernel.hpp"
#include "monet/pooling.hpp"
#include "monet/rng.hpp"
#include "monet/verification.hpp"

namespace {

using namespace monet;

// Args: n (locations), C (channels).
void BM_SvdThin(benchmark::State& state) {
  Rng rng(1);
  const Matrix a = random_normal(state.range(0), state.range(1), rng);
  for (auto _ : state) benchmark::DoNotOptimize(svd_thin(a));
}
BENCHMARK(BM_SvdThin)->Args({64, 17})->Args({196, 65})->Args({784, 129});

void BM_SsqrtForward(benchmark::State& state) {
  Rng rng(2);
  const Matrix x = random_normal(state.range(0), state.range(1), rng);
  const HomogeneousFeatures xt = hm_forward(x);
  for (auto _ : state) benchmark::DoNotOptimize(ssqrt_forward(xt));
}
BENCHMARK(BM_SsqrtForward)->Args({64, 16})->Args({196, 64})->Args({784, 128});

void BM_SsqrtBackward(benchmark::State& state) {
  Rng rng(3);
  const Matrix x = random_normal(state.range(0), state.range(1), rng);
  const SsqrtResult fwd = ssqrt_forward(hm_forward(x));
  const Matrix g = random_normal(fwd.y.rows(), fwd.y.cols(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(ssqrt_backward(g, fwd.cache, GuardMode::kTrain));
}
BENCHMARK(BM_SsqrtBackward)->Args({64, 16})->Args({196, 64})->Args({784, 128});

void BM_BilinearPool(benchmark::State& state) {
  Rng rng(4);
  const Matrix y = random_normal(state.range(0), state.range(1), rng);
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_pool_forward(y));
}
BENCHMARK(BM_BilinearPool)->Args({64, 17})->Args({196, 65})->Args({784, 129});

// Args: n, C, D.
void BM_TsPool(benchmark::State& state) {
  Rng rng(5);
  const Matrix y = random_normal(state.range(0), state.range(1), rng);
  const SketchParams params = SketchParams::generate(state.range(1), state.range(2), 6);
  for (auto _ : state) benchmark::DoNotOptimize(ts_pool_forward(y, params));
}
BENCHMARK(BM_TsPool)->Args({17, 17, 1024})->Args({64, 17, 1024})->Args({65, 65, 10000});

void BM_TsPoolBackward(benchmark::State& state) {
  Rng rng(7);
  const Matrix y = random_normal(state.range(0), state.range(1), rng);
  const SketchParams params = SketchParams::generate(state.range(1), state.range(2), 8);
  const Vector g = random_normal(state.range(2), 1, rng).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(ts_pool_backward(g, y, params));
}
BENCHMARK(BM_TsPoolBackward)->Args({17, 17, 1024})->Args({65, 65, 10000});

void BM_Fft(benchmark::State& state) {
  Rng rng(9);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(fft_real(x));
}
BENCHMARK(BM_Fft)->Arg(1024)->Arg(10000)->Arg(16384);

// Full descriptor for the desk-scale input (n = 64, C = 16).
void BM_DescribeForward(benchmark::State& state) {
  const auto grid = variant_grid(1024);
  const VariantSpec spec = grid[static_cast<std::size_t>(state.range(0))];
  HeadConfig cfg = HeadConfig::make(spec, 16, 10);
  cfg.preprocess_signed_sqrt = true;
  Rng rng(11);
  const Matrix x = random_uniform(64, 16, 0.0, 2.0, rng);
  state.SetLabel(spec.label());
  for (auto _ : state) benchmark::DoNotOptimize(describe_forward(x, cfg));
}
BENCHMARK(BM_DescribeForward)->DenseRange(0, 7);

}  // namespace

BENCHMARK_MAIN();
