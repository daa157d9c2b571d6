// voxid/bench_gemm.cc

// Copyright 2026  The Voxid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "voxid/rng.h"
#include "voxid/tensor.h"

namespace {

void BM_GemmNN(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  voxid::Rng rng(7);
  std::vector<double> a(static_cast<size_t>(n) * n), b(a.size()), c(a.size());
  for (double& x : a) x = rng.NextGaussian();
  for (double& x : b) x = rng.NextGaussian();
  for (auto _ : state) {
    voxid::nn::GemmNN(n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * n * n * n * static_cast<double>(state.iterations()),
      benchmark::Counter::kIsRate, benchmark::Counter::OneK::kIs1000);
}
BENCHMARK(BM_GemmNN)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

// im2col-shaped case: tall-skinny times small, as conv2d produces.
void BM_GemmConvShape(benchmark::State& state) {
  const int m = 1000, k = 100, n = 128;
  voxid::Rng rng(7);
  std::vector<double> a(static_cast<size_t>(m) * k);
  std::vector<double> b(static_cast<size_t>(k) * n);
  std::vector<double> c(static_cast<size_t>(m) * n);
  for (double& x : a) x = rng.NextGaussian();
  for (double& x : b) x = rng.NextGaussian();
  for (auto _ : state) {
    voxid::nn::GemmNN(m, n, k, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOP/s"] = benchmark::Counter(
      2.0 * m * n * k * static_cast<double>(state.iterations()),
      benchmark::Counter::kIsRate, benchmark::Counter::OneK::kIs1000);
}
BENCHMARK(BM_GemmConvShape);

}  // namespace
