// voxid/stft.h

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

#ifndef VOXID_STFT_H_
#define VOXID_STFT_H_

#include <complex>
#include <vector>

#include "voxid/audio.h"

namespace voxid::signal {

struct StftConfig {
  int fft_size = 512;  // must be a power of two
  int hop = 160;
  int sample_rate = 16000;

  int NumBins() const { return fft_size / 2 + 1; }
  double HopSeconds() const {
    return static_cast<double>(hop) / sample_rate;
  }
};

// The pipeline-wide analysis grid: 32 ms Hann frames every 10 ms at 16 kHz.
// Segmentation probabilities, separator frames and classifier features all
// share it, so spectrograms can be handed between stages directly.
inline StftConfig DefaultStftConfig() { return StftConfig{}; }

constexpr int kPipelineSampleRate = 16000;

// Column-major on frames: data[frame][bin].
struct ComplexSpectrogram {
  std::vector<std::vector<double>> magnitude;  // [frames][bins], >= 0
  std::vector<std::vector<double>> phase;      // [frames][bins], radians
  StftConfig config;
  int64_t source_samples = 0;  // original length, for iSTFT trimming

  int NumFrames() const { return static_cast<int>(magnitude.size()); }
  int NumBins() const { return config.NumBins(); }
};

// Center-aligned Hann STFT with reflection padding of fft_size/2 on both
// ends; frame count is ceil(len / hop).
ComplexSpectrogram Stft(const AudioBuffer& audio, const StftConfig& cfg);

// Weighted overlap-add inverse with synthesis window equal to the analysis
// window, normalized by the summed squared window envelope and trimmed to
// the recorded source length.
AudioBuffer Istft(const ComplexSpectrogram& spec);

// Elementwise log(1 + x); input must be nonnegative.
std::vector<std::vector<double>> Log1pCompress(
    const std::vector<std::vector<double>>& m);

// Elementwise exp(x) - 1 with negative results clamped to zero.
std::vector<std::vector<double>> Expm1Expand(
    const std::vector<std::vector<double>>& m);

// In-place radix-2 FFT over a power-of-two length (inverse applies the 1/n
// scale).  Exposed for the feature extractor; tests check it against a
// quadratic-time DFT.
void Fft(std::vector<std::complex<double>>& buf, bool inverse);

std::vector<double> HannWindow(int size);

}  // namespace voxid::signal

#endif  // VOXID_STFT_H_
