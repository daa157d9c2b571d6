// voxid/bench_pipeline.cc

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
#include "voxid/segmenter.h"
#include "voxid/separator.h"
#include "voxid/tape.h"

namespace {

using namespace voxid;

// One 500 ms window through the segmentation CNN (inference mode).
void BM_SegnetWindow(benchmark::State& state) {
  seg::SegmenterConfig cfg;
  nn::ParameterSet params;
  Rng rng(3);
  seg::InitSegmenterParams(params, cfg, rng);
  std::vector<std::vector<double>> window(
      cfg.window_frames, std::vector<double>(cfg.feature_dims, 0.1));
  for (auto _ : state) {
    double p = seg::SegnetForward(params, cfg, window);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SegnetWindow);

// One 6 s snippet through the separator network (inference mode).
void BM_SepnetSnippet(benchmark::State& state) {
  sep::SeparatorConfig cfg;
  nn::ParameterSet params;
  Rng rng(3);
  sep::InitSeparatorParams(params, cfg, rng);
  std::vector<std::vector<double>> log_mag(
      600, std::vector<double>(cfg.bins, 0.2));
  for (auto _ : state) {
    auto out = sep::SepnetApply(params, cfg, log_mag);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SepnetSnippet);

// Viterbi smoothing over a 10-minute probability track.
void BM_Viterbi(benchmark::State& state) {
  Rng rng(5);
  seg::FrameProbs probs;
  probs.p_vocal.resize(60000);
  for (double& p : probs.p_vocal) p = rng.NextDouble();
  const seg::TransitionModel tm;
  for (auto _ : state) {
    auto labels = seg::ViterbiSmooth(probs, tm);
    benchmark::DoNotOptimize(labels.data());
  }
}
BENCHMARK(BM_Viterbi);

}  // namespace

BENCHMARK_MAIN();
