// voxid/audio.h

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

#ifndef VOXID_AUDIO_H_
#define VOXID_AUDIO_H_

#include <string>
#include <vector>

namespace voxid::signal {

// Mono PCM carrier used by every pipeline stage.  Samples are clamped to
// [-1, 1] on ingestion and stay finite throughout.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  int64_t NumSamples() const { return static_cast<int64_t>(samples.size()); }
  double DurationSeconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Reads a RIFF/WAVE file.  Accepts PCM 16-bit and IEEE float-32, one or two
// channels; stereo is averaged down to mono and 16-bit values are scaled by
// 1/32768.  Samples are clamped to [-1, 1].
AudioBuffer ReadWav(const std::string& path);

// Writes mono PCM 16-bit at the buffer's sample rate.
void WriteWav(const std::string& path, const AudioBuffer& audio);

// Band-limited resampling with a 64-tap Kaiser-windowed sinc.  Returns the
// input unchanged when the rates already match.  Output length is
// round(len * target / source).
AudioBuffer Resample(const AudioBuffer& audio, int target_rate);

// Splits into consecutive non-overlapping snippets of the given length.
// A final remainder covering at least half a snippet is zero-padded to full
// length; a shorter one is dropped.  Empty input yields an empty list.
std::vector<AudioBuffer> Chop(const AudioBuffer& audio,
                              double snippet_seconds);

double Rms(const AudioBuffer& audio);

}  // namespace voxid::signal

#endif  // VOXID_AUDIO_H_
