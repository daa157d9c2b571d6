// voxid/synth.h

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

#ifndef VOXID_SYNTH_H_
#define VOXID_SYNTH_H_

#include <string>
#include <vector>

#include "voxid/audio.h"
#include "voxid/rng.h"
#include "voxid/timeline.h"

namespace voxid::synth {

// Voice characteristics separating one synthetic singer from another.
struct SingerProfile {
  std::string name;
  double f0_lo = 110.0;        // Hz, must stay within [80, 1000]
  double f0_hi = 160.0;
  double vibrato_rate = 5.0;   // Hz
  double vibrato_depth = 20.0; // cents
  double formants[3] = {500.0, 1500.0, 2800.0};  // Hz, increasing
  double breathiness = 0.1;    // noise-to-voice ratio, at most 0.5
};

struct Section {
  double duration_s = 0.0;
  bool vocal = false;
};

struct SongRecipe {
  std::vector<Section> sections;  // total >= 8 s, both kinds present
  int singer = 0;
  double tempo_bpm = 100.0;
  uint64_t seed = 0;
};

struct SongOutput {
  signal::AudioBuffer mixture;
  signal::AudioBuffer vocal_stem;    // silent outside vocal sections
  signal::AudioBuffer instrumental;  // scaled bed; mixture = vocal + this
  SegmentTimeline timeline;
};

struct DatasetPaths {
  std::string segmentation_manifest;
  std::string pair_manifest;
  std::string classification_manifest;
  std::string dataset_json;
};

// Pulse-train voice through three formant resonators with vibrato, a
// seeded f0 random walk, and additive breath noise.  Pure in
// (profile, duration, seed).
signal::AudioBuffer SynthVocal(const SingerProfile& profile,
                               double duration_s, uint64_t seed);

// Sawtooth chord pad, percussive clicks on a tempo grid, and a noise
// floor; RMS lands inside [0.05, 0.5].
signal::AudioBuffer SynthInstrumental(double duration_s, uint64_t seed);

// Renders the recipe into an exact additive mixture at a seeded SNR in
// [0, 10] dB over the vocal sections.
SongOutput SynthSong(const SongRecipe& recipe,
                     const std::vector<SingerProfile>& profiles);

// Deterministic profile generation; mean f0s are pairwise at least 30 Hz
// apart by construction.
std::vector<SingerProfile> MakeProfiles(int num_singers, Rng& rng);

// Writes clip WAVs, separation snippet pairs, the three manifests, and
// dataset.json under out_dir.  Byte-identical across runs with one seed.
DatasetPaths BuildDataset(int num_singers, int clips_per_singer,
                          double clip_seconds, const std::string& out_dir,
                          uint64_t seed);

}  // namespace voxid::synth

#endif  // VOXID_SYNTH_H_
