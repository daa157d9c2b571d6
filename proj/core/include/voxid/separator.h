// voxid/separator.h

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

#ifndef VOXID_SEPARATOR_H_
#define VOXID_SEPARATOR_H_

#include <string>
#include <vector>

#include "voxid/audio.h"
#include "voxid/manifest.h"
#include "voxid/params.h"
#include "voxid/rng.h"
#include "voxid/stft.h"
#include "voxid/tape.h"

namespace voxid::sep {

// Recurrent layer variant on the encoder-decoder shortcuts.
enum class SkipKind { kGru, kLstm };

const char* SkipKindName(SkipKind kind);
SkipKind SkipKindFromName(const std::string& name);

// Encoder-decoder over log1p spectrograms: frequency bins are channels,
// convolution runs along time.  Each encoder scale feeds a recurrent skip
// layer whose output is added to the matching decoder scale.
struct SeparatorConfig {
  int bins = 257;
  int enc1 = 256;
  int enc2 = 128;
  int enc3 = 64;
  int kernel = 5;
  int stride = 2;
  SkipKind skip_kind = SkipKind::kGru;
  double snippet_seconds = 6.0;
};

struct SepTrainOptions {
  int epochs = 5;
  int steps_per_epoch = 40;  // one step = one batch of snippet pairs
  int batch = 4;
  uint64_t seed = 42;
  double learning_rate = 0.001;
};

struct SepEvalTrack {
  std::string id;        // mixture path
  double si_sdr = 0.0;   // separated estimate vs vocal stem
  double baseline = 0.0; // unprocessed mixture vs vocal stem
};

struct SepEvalResult {
  std::vector<SepEvalTrack> per_track;
  double median_si_sdr = 0.0;
  double mean_si_sdr = 0.0;
  double median_baseline = 0.0;
  double mean_baseline = 0.0;
  double median_improvement = 0.0;
  double mean_improvement = 0.0;
};

struct SeparationResult {
  signal::ComplexSpectrogram vocal_spectrogram;
  signal::AudioBuffer vocal_audio;
};

void InitSeparatorParams(nn::ParameterSet& params, const SeparatorConfig& cfg,
                         Rng& rng);

// x [B, bins, T] log1p magnitudes -> same shape, nonnegative.  T must be a
// positive multiple of 8 so the three stride-2 stages mirror exactly.
nn::Var SepnetForward(nn::Tape& tape, nn::ParameterSet& params,
                      const SeparatorConfig& cfg, nn::Var x);

// Single-snippet convenience on the [frames][bins] layout, eval mode.
std::vector<std::vector<double>> SepnetApply(
    nn::ParameterSet& params, const SeparatorConfig& cfg,
    const std::vector<std::vector<double>>& log_mag);

// Chops to snippet length (tail zero-padded), separates each snippet, and
// reconstructs with the mixture's phase.  Audio output is at the pipeline
// rate and exactly as long as the (resampled) input.
SeparationResult Separate(const signal::AudioBuffer& mixture,
                          nn::ParameterSet& params,
                          const SeparatorConfig& cfg);

// Initializes params (must be empty) and trains with L1 loss on log1p
// magnitudes over random snippet batches.
nn::TrainTrace TrainSeparator(const std::vector<PairItem>& pairs,
                              const SeparatorConfig& cfg,
                              const SepTrainOptions& opt,
                              nn::ParameterSet& params);

// Scale-invariant signal-to-distortion ratio in dB, capped to [-100, 100].
// The reference must not be identically zero.
double SiSdr(const signal::AudioBuffer& reference,
             const signal::AudioBuffer& estimate);

SepEvalResult EvalSeparation(const std::vector<PairItem>& pairs,
                             nn::ParameterSet& params,
                             const SeparatorConfig& cfg);

void SaveSeparatorBundle(const std::string& dir, const SeparatorConfig& cfg,
                         const nn::ParameterSet& params);
SeparatorConfig LoadSeparatorBundle(const std::string& dir,
                                    nn::ParameterSet& params);

}  // namespace voxid::sep

#endif  // VOXID_SEPARATOR_H_
