// Copyright 2026 The SEPC Authors
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

#include "sepc/conv.hpp"
#include "sepc/deform_conv.hpp"
#include "sepc/head.hpp"
#include "sepc/pconv.hpp"
#include "sepc/scale_space.hpp"
#include "sepc/sepc.hpp"

namespace {

void BM_Conv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  sepc::Rng rng(1);
  const sepc::Tensor x = sepc::random_uniform({1, c, s, s}, rng);
  const sepc::Conv2dKernel k = sepc::Conv2dKernel::kaiming(c, c, 3, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sepc::conv2d(x, k));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(9 * c * c * s * s));
}
BENCHMARK(BM_Conv2d)->Args({16, 32})->Args({16, 64})->Args({32, 32});

void BM_DeformConv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto s = static_cast<std::size_t>(state.range(1));
  sepc::Rng rng(2);
  const sepc::Tensor x = sepc::random_uniform({1, c, s, s}, rng);
  const sepc::Conv2dKernel k = sepc::Conv2dKernel::kaiming(c, c, 3, 1, rng);
  const sepc::Tensor off =
      sepc::random_uniform(sepc::offset_field_shape(x.shape(), k), rng, -1.5, 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(sepc::deform_conv2d(x, k, off));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(9 * c * c * s * s));
}
BENCHMARK(BM_DeformConv2d)->Args({16, 32})->Args({16, 64});

void BM_PConvForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  sepc::Rng rng(3);
  const sepc::FeaturePyramid p = sepc::random_pyramid({1, c, 64, 64}, 4, rng);
  const sepc::PConvLayer layer = sepc::PConvLayer::kaiming(c, c, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sepc::pconv_forward(p, layer));
}
BENCHMARK(BM_PConvForward)->Arg(8)->Arg(16);

void BM_SepcForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  sepc::Rng rng(4);
  const sepc::FeaturePyramid p = sepc::random_pyramid({1, c, 64, 64}, 4, rng);
  const sepc::SepcLayer layer = sepc::SepcLayer::from(sepc::PConvLayer::kaiming(c, c, rng));
  for (auto _ : state) benchmark::DoNotOptimize(sepc::sepc_forward(p, layer));
}
BENCHMARK(BM_SepcForward)->Arg(8)->Arg(16);

void BM_GaussianBlur(benchmark::State& state) {
  const auto s = static_cast<std::size_t>(state.range(0));
  const double t = static_cast<double>(state.range(1));
  sepc::Rng rng(5);
  const sepc::Tensor x = sepc::random_uniform({1, 1, s, s}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sepc::gaussian_blur(x, t));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s * s));
}
BENCHMARK(BM_GaussianBlur)->Args({128, 1})->Args({256, 1})->Args({256, 4});

}  // namespace

BENCHMARK_MAIN();
