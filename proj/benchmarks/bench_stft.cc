// voxid/bench_stft.cc

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

#include "voxid/audio.h"
#include "voxid/features.h"
#include "voxid/rng.h"
#include "voxid/stft.h"

namespace {

voxid::signal::AudioBuffer NoiseSeconds(double seconds) {
  voxid::Rng rng(11);
  voxid::signal::AudioBuffer a;
  a.sample_rate = voxid::signal::kPipelineSampleRate;
  a.samples.resize(
      static_cast<size_t>(seconds * voxid::signal::kPipelineSampleRate));
  for (double& x : a.samples) x = 0.3 * rng.NextGaussian();
  return a;
}

void BM_Stft10s(benchmark::State& state) {
  const voxid::signal::AudioBuffer a = NoiseSeconds(10.0);
  const voxid::signal::StftConfig cfg;
  for (auto _ : state) {
    auto s = voxid::signal::Stft(a, cfg);
    benchmark::DoNotOptimize(s.magnitude.data());
  }
}
BENCHMARK(BM_Stft10s);

void BM_StftRoundTrip10s(benchmark::State& state) {
  const voxid::signal::AudioBuffer a = NoiseSeconds(10.0);
  const voxid::signal::StftConfig cfg;
  for (auto _ : state) {
    auto s = voxid::signal::Stft(a, cfg);
    auto back = voxid::signal::Istft(s);
    benchmark::DoNotOptimize(back.samples.data());
  }
}
BENCHMARK(BM_StftRoundTrip10s);

void BM_Mfcc10s(benchmark::State& state) {
  const voxid::signal::AudioBuffer a = NoiseSeconds(10.0);
  const voxid::signal::StftConfig cfg;
  const auto s = voxid::signal::Stft(a, cfg);
  for (auto _ : state) {
    auto f = voxid::signal::Mfcc(s);
    auto d = voxid::signal::AddDeltas(f);
    benchmark::DoNotOptimize(d.data.data());
  }
}
BENCHMARK(BM_Mfcc10s);

void BM_Resample48kTo16k(benchmark::State& state) {
  voxid::Rng rng(11);
  voxid::signal::AudioBuffer a;
  a.sample_rate = 48000;
  a.samples.resize(48000 * 5);
  for (double& x : a.samples) x = 0.3 * rng.NextGaussian();
  for (auto _ : state) {
    auto r = voxid::signal::Resample(a, 16000);
    benchmark::DoNotOptimize(r.samples.data());
  }
}
BENCHMARK(BM_Resample48kTo16k);

}  // namespace
