// voxid/synth.cc

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

#include "voxid/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "voxid/error.h"
#include "voxid/manifest.h"
#include "voxid/stft.h"

namespace voxid::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kRate = signal::kPipelineSampleRate;

// Two-pole resonator with roughly unit peak gain.
struct Resonator {
  double a1, a2, g;
  double y1 = 0.0, y2 = 0.0;

  Resonator(double freq, double bandwidth) {
    const double r = std::exp(-kPi * bandwidth / kRate);
    a1 = 2.0 * r * std::cos(2.0 * kPi * freq / kRate);
    a2 = -r * r;
    g = 1.0 - r;
  }

  double Tick(double x) {
    const double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double RmsOf(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double e = 0.0;
  for (const double x : v) e += x * x;
  return std::sqrt(e / static_cast<double>(v.size()));
}

double PeakOf(const std::vector<double>& v) {
  double p = 0.0;
  for (const double x : v) p = std::max(p, std::abs(x));
  return p;
}

// Scales to the target RMS but never past the peak ceiling.
void Normalize(std::vector<double>& v, double target_rms) {
  const double rms = RmsOf(v);
  if (rms <= 0.0) return;
  double scale = target_rms / rms;
  const double peak = PeakOf(v) * scale;
  if (peak > 0.95) scale *= 0.95 / peak;
  for (double& x : v) x *= scale;
}

void ValidateProfile(const SingerProfile& p) {
  if (!(p.f0_lo >= 80.0 && p.f0_lo < p.f0_hi && p.f0_hi <= 1000.0)) {
    Throw(ErrorCode::kInvalidArgument,
          "f0 range [" + std::to_string(p.f0_lo) + ", " +
              std::to_string(p.f0_hi) + "] must sit inside [80, 1000] Hz");
  }
  if (!(p.formants[0] > 0.0 && p.formants[0] < p.formants[1] &&
        p.formants[1] < p.formants[2])) {
    Throw(ErrorCode::kInvalidArgument, "formants must be increasing");
  }
  if (p.breathiness < 0.0 || p.breathiness > 0.5) {
    Throw(ErrorCode::kInvalidArgument, "breathiness must be in [0, 0.5]");
  }
  if (p.vibrato_rate < 0.0 || p.vibrato_depth < 0.0) {
    Throw(ErrorCode::kInvalidArgument, "vibrato must be nonnegative");
  }
}

// Band-limited sawtooth period: harmonics at 1/k up to the cutoff.
std::vector<double> SawTable(double freq, double cutoff_hz, int size) {
  const int harmonics =
      std::max(1, std::min(48, static_cast<int>(cutoff_hz / freq)));
  std::vector<double> table(size, 0.0);
  for (int k = 1; k <= harmonics; ++k) {
    for (int j = 0; j < size; ++j) {
      table[j] += std::sin(2.0 * kPi * k * j / size) / k;
    }
  }
  return table;
}

double MidiHz(int midi) { return 440.0 * std::exp2((midi - 69) / 12.0); }

signal::AudioBuffer RenderInstrumental(double duration_s, double tempo_bpm,
                                       Rng& rng) {
  const int64_t n = std::llround(duration_s * kRate);
  std::vector<double> pad(n, 0.0), clicks(n, 0.0);

  const double beat_s = 60.0 / tempo_bpm;
  const double chord_s = 8.0 * beat_s;  // two bars
  const int root_midi = 45 + static_cast<int>(rng.NextBelow(12));
  constexpr int kDegrees[6] = {0, 5, 7, 3, 10, -4};
  constexpr int kTableSize = 4096;

  for (double chord_start = 0.0; chord_start < duration_s;
       chord_start += chord_s) {
    const int degree = kDegrees[rng.NextBelow(6)];
    const bool minor = rng.NextDouble() < 0.5;
    const int triad[3] = {0, minor ? 3 : 4, 7};
    const int64_t begin = std::llround(chord_start * kRate);
    const int64_t end =
        std::min<int64_t>(n, std::llround((chord_start + chord_s) * kRate));
    const int64_t len = end - begin;
    if (len <= 0) break;
    const int64_t fade = std::min<int64_t>(len / 2, kRate / 100);
    for (int note = 0; note < 3; ++note) {
      const double freq = MidiHz(root_midi + degree + triad[note]);
      const std::vector<double> table = SawTable(freq, 6000.0, kTableSize);
      double phase = rng.NextDouble();
      const double step = freq / kRate;
      for (int64_t i = 0; i < len; ++i) {
        const double pos = phase * kTableSize;
        const int j0 = static_cast<int>(pos) % kTableSize;
        const int j1 = (j0 + 1) % kTableSize;
        const double frac = pos - std::floor(pos);
        double env = 1.0;
        if (i < fade) env = static_cast<double>(i) / fade;
        if (len - 1 - i < fade) {
          env = std::min(env, static_cast<double>(len - 1 - i) / fade);
        }
        pad[begin + i] +=
            env * (table[j0] + frac * (table[j1] - table[j0])) / 3.0;
        phase += step;
        if (phase >= 1.0) phase -= 1.0;
      }
    }
  }

  const int64_t click_len = kRate / 50;  // 20 ms burst
  for (double tb = 0.0; tb < duration_s; tb += beat_s) {
    const int64_t begin = std::llround(tb * kRate);
    for (int64_t j = 0; j < click_len && begin + j < n; ++j) {
      clicks[begin + j] +=
          0.8 * rng.NextGaussian() * std::exp(-static_cast<double>(j) /
                                              (0.008 * kRate));
    }
  }

  signal::AudioBuffer out;
  out.sample_rate = kRate;
  out.samples.resize(n);
  double floor_state = 0.0;
  const double floor_coeff = 0.3;
  for (int64_t i = 0; i < n; ++i) {
    floor_state += floor_coeff * (rng.NextGaussian() - floor_state);
    out.samples[i] = 0.7 * pad[i] + clicks[i] + 0.05 * floor_state;
  }
  Normalize(out.samples, rng.Uniform(0.10, 0.35));
  return out;
}

std::string IndexedName(const char* prefix, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, index);
  return buf;
}

}  // namespace

signal::AudioBuffer SynthVocal(const SingerProfile& profile,
                               double duration_s, uint64_t seed) {
  if (duration_s <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "duration must be positive");
  }
  ValidateProfile(profile);
  Rng rng(seed);
  const int64_t n = std::llround(duration_s * kRate);

  // f0 control track at 10 ms with margins so vibrato stays in range.
  const int ctrl_hop = kRate / 100;
  const int64_t num_ctrl = n / ctrl_hop + 2;
  const double span = profile.f0_hi - profile.f0_lo;
  const double lo_m = profile.f0_lo + 0.03 * span;
  const double hi_m = profile.f0_hi - 0.03 * span;
  std::vector<double> f0_ctrl(num_ctrl);
  double f = rng.Uniform(lo_m, hi_m);
  for (int64_t k = 0; k < num_ctrl; ++k) {
    f0_ctrl[k] = f;
    f = std::clamp(f + rng.NextGaussian() * 0.04 * span, lo_m, hi_m);
  }

  const double vib_phase = rng.Uniform(0.0, 2.0 * kPi);
  const double env_rate = rng.Uniform(0.8, 1.7);
  const double env_phase = rng.Uniform(0.0, 2.0 * kPi);

  Resonator r1(profile.formants[0], 80.0 + 0.05 * profile.formants[0]);
  Resonator r2(profile.formants[1], 80.0 + 0.05 * profile.formants[1]);
  Resonator r3(profile.formants[2], 80.0 + 0.05 * profile.formants[2]);

  std::vector<double> voiced(n);
  double phase = rng.NextDouble();
  for (int64_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kRate;
    const int64_t k = i / ctrl_hop;
    const double frac =
        static_cast<double>(i - k * ctrl_hop) / ctrl_hop;
    const double f0 = f0_ctrl[k] + frac * (f0_ctrl[k + 1] - f0_ctrl[k]);
    const double vib = std::exp2(
        profile.vibrato_depth *
        std::sin(2.0 * kPi * profile.vibrato_rate * t + vib_phase) / 1200.0);
    phase += f0 * vib / kRate;
    double excitation = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      excitation = 1.0;
    }
    const double y = r1.Tick(excitation) + 0.7 * r2.Tick(excitation) +
                     0.5 * r3.Tick(excitation);
    voiced[i] =
        y * (0.7 + 0.3 * std::sin(2.0 * kPi * env_rate * t + env_phase));
  }

  // Aspiration: low-passed noise matched against the voiced level.
  std::vector<double> breath(n);
  double lp = 0.0;
  const double lp_coeff =
      1.0 - std::exp(-2.0 * kPi * 4000.0 / kRate);
  for (int64_t i = 0; i < n; ++i) {
    lp += lp_coeff * (rng.NextGaussian() - lp);
    breath[i] = lp;
  }
  const double voiced_rms = RmsOf(voiced);
  const double breath_rms = RmsOf(breath);
  const double breath_gain =
      breath_rms > 0.0 ? profile.breathiness * voiced_rms / breath_rms : 0.0;

  signal::AudioBuffer out;
  out.sample_rate = kRate;
  out.samples.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    out.samples[i] = voiced[i] + breath_gain * breath[i];
  }
  Normalize(out.samples, rng.Uniform(0.12, 0.25));
  return out;
}

signal::AudioBuffer SynthInstrumental(double duration_s, uint64_t seed) {
  if (duration_s <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "duration must be positive");
  }
  Rng rng(seed);
  const double tempo = rng.Uniform(80.0, 130.0);
  return RenderInstrumental(duration_s, tempo, rng);
}

SongOutput SynthSong(const SongRecipe& recipe,
                     const std::vector<SingerProfile>& profiles) {
  if (recipe.singer < 0 ||
      recipe.singer >= static_cast<int>(profiles.size())) {
    Throw(ErrorCode::kInvalidArgument, "singer index out of range");
  }
  if (recipe.sections.empty()) {
    Throw(ErrorCode::kInvalidArgument, "recipe has no sections");
  }
  if (recipe.tempo_bpm <= 0.0) {
    Throw(ErrorCode::kInvalidArgument, "tempo must be positive");
  }
  double total = 0.0;
  bool has_vocal = false, has_instrumental = false;
  for (const Section& s : recipe.sections) {
    if (s.duration_s <= 0.0) {
      Throw(ErrorCode::kInvalidArgument, "section durations must be positive");
    }
    total += s.duration_s;
    (s.vocal ? has_vocal : has_instrumental) = true;
  }
  // Tolerance absorbs float re-association when a caller assembles the
  // final section as a remainder of the target length.
  if (total < 8.0 - 1e-9) {
    Throw(ErrorCode::kInvalidArgument,
          "recipe must cover at least 8 s, got " + std::to_string(total));
  }
  if (!has_vocal || !has_instrumental) {
    Throw(ErrorCode::kInvalidArgument,
          "recipe needs at least one vocal and one instrumental section");
  }

  Rng rng(recipe.seed);
  std::vector<uint64_t> vocal_seeds;
  for (const Section& s : recipe.sections) {
    if (s.vocal) vocal_seeds.push_back(rng.NextU64());
  }
  Rng inst_rng(rng.NextU64());
  const double snr_db = rng.Uniform(0.0, 10.0);

  const int64_t n = std::llround(total * kRate);
  SongOutput out;
  out.vocal_stem.sample_rate = kRate;
  out.vocal_stem.samples.assign(n, 0.0);

  const int64_t fade = kRate / 100;  // 10 ms edges inside vocal sections
  double cursor_s = 0.0;
  size_t seed_idx = 0;
  for (const Section& s : recipe.sections) {
    const int64_t begin = std::llround(cursor_s * kRate);
    const int64_t end = std::llround((cursor_s + s.duration_s) * kRate);
    cursor_s += s.duration_s;
    if (!s.vocal) continue;
    const int64_t len = std::min(end, n) - begin;
    signal::AudioBuffer v =
        SynthVocal(profiles[recipe.singer],
                   static_cast<double>(len) / kRate,
                   vocal_seeds[seed_idx++]);
    for (int64_t i = 0; i < len && i < v.NumSamples(); ++i) {
      double env = 1.0;
      if (i < fade) env = static_cast<double>(i) / fade;
      if (len - 1 - i < fade) {
        env = std::min(env, static_cast<double>(len - 1 - i) / fade);
      }
      out.vocal_stem.samples[begin + i] = env * v.samples[i];
    }
  }

  signal::AudioBuffer bed = RenderInstrumental(
      static_cast<double>(n) / kRate, recipe.tempo_bpm, inst_rng);

  // Gain putting the bed snr_db below the vocal over the vocal sections.
  double vocal_energy = 0.0, bed_energy = 0.0;
  int64_t vocal_count = 0;
  cursor_s = 0.0;
  for (const Section& s : recipe.sections) {
    const int64_t begin = std::llround(cursor_s * kRate);
    const int64_t end =
        std::min<int64_t>(n, std::llround((cursor_s + s.duration_s) * kRate));
    cursor_s += s.duration_s;
    if (!s.vocal) continue;
    for (int64_t i = begin; i < end; ++i) {
      vocal_energy += out.vocal_stem.samples[i] * out.vocal_stem.samples[i];
      bed_energy += bed.samples[i] * bed.samples[i];
      ++vocal_count;
    }
  }
  double gain = 1.0;
  if (bed_energy > 0.0 && vocal_energy > 0.0) {
    gain = std::sqrt(vocal_energy / bed_energy) *
           std::pow(10.0, -snr_db / 20.0);
  }

  out.instrumental.sample_rate = kRate;
  out.instrumental.samples.resize(n);
  out.mixture.sample_rate = kRate;
  out.mixture.samples.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    out.instrumental.samples[i] = gain * bed.samples[i];
    out.mixture.samples[i] =
        out.vocal_stem.samples[i] + out.instrumental.samples[i];
  }
  const double peak = PeakOf(out.mixture.samples);
  if (peak > 0.98) {
    const double scale = 0.98 / peak;
    // Rebuild the mixture from the scaled stems so mixture == stem + bed
    // holds exactly rather than to rounding error.
    for (int64_t i = 0; i < n; ++i) {
      out.vocal_stem.samples[i] *= scale;
      out.instrumental.samples[i] *= scale;
      out.mixture.samples[i] =
          out.vocal_stem.samples[i] + out.instrumental.samples[i];
    }
  }

  double start = 0.0;
  for (const Section& s : recipe.sections) {
    const SegmentLabel label =
        s.vocal ? SegmentLabel::kVocal : SegmentLabel::kNonVocal;
    if (!out.timeline.segments.empty() &&
        out.timeline.segments.back().label == label) {
      out.timeline.segments.back().end_s += s.duration_s;
    } else {
      Segment seg;
      seg.start_s = start;
      seg.end_s = start + s.duration_s;
      seg.label = label;
      out.timeline.segments.push_back(seg);
    }
    start += s.duration_s;
  }
  return out;
}

std::vector<SingerProfile> MakeProfiles(int num_singers, Rng& rng) {
  if (num_singers < 1) {
    Throw(ErrorCode::kInvalidArgument, "need at least one singer");
  }
  if (num_singers > 17) {
    Throw(ErrorCode::kInvalidArgument,
          "f0 separation supports at most 17 distinct singers");
  }
  std::vector<SingerProfile> profiles;
  const double base = 105.0 + rng.Uniform(0.0, 10.0);
  double center = base;
  for (int s = 0; s < num_singers; ++s) {
    SingerProfile p;
    p.name = IndexedName("singer_", s);
    const double half = rng.Uniform(14.0, 22.0);
    p.f0_lo = center - half;
    p.f0_hi = center + half;
    p.vibrato_rate = rng.Uniform(4.0, 7.0);
    p.vibrato_depth = rng.Uniform(12.0, 35.0);
    p.formants[0] = rng.Uniform(420.0, 820.0);
    p.formants[1] = p.formants[0] + rng.Uniform(450.0, 950.0);
    p.formants[2] = p.formants[1] + rng.Uniform(600.0, 1100.0);
    p.breathiness = rng.Uniform(0.05, 0.28);
    profiles.push_back(p);
    center += 45.0 + rng.Uniform(0.0, 6.0);
  }
  return profiles;
}

DatasetPaths BuildDataset(int num_singers, int clips_per_singer,
                          double clip_seconds, const std::string& out_dir,
                          uint64_t seed) {
  if (num_singers < 2) {
    Throw(ErrorCode::kInvalidArgument, "need at least two singers");
  }
  if (clips_per_singer < 1) {
    Throw(ErrorCode::kInvalidArgument, "need at least one clip per singer");
  }
  if (clip_seconds < 8.0) {
    Throw(ErrorCode::kInvalidArgument,
          "clips must be at least 8 s, got " + std::to_string(clip_seconds));
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    Throw(ErrorCode::kIoFailure,
          "cannot create " + out_dir + ": " + ec.message());
  }

  Rng root(seed);
  Rng profile_rng = root.Fork(1);
  std::vector<SingerProfile> profiles =
      MakeProfiles(num_singers, profile_rng);

  std::vector<SegmentationItem> seg_items;
  std::vector<PairItem> pair_items;
  std::vector<ClassificationItem> cls_items;
  const double scale = clip_seconds / 10.0;
  for (int s = 0; s < num_singers; ++s) {
    const std::string singer_dir = IndexedName("singer_", s);
    fs::create_directories(fs::path(out_dir) / "wavs" / singer_dir);
    fs::create_directories(fs::path(out_dir) / "pairs" / singer_dir);
    for (int c = 0; c < clips_per_singer; ++c) {
      Rng clip_rng = root.Fork(2 + uint64_t{static_cast<uint64_t>(s)} *
                                       clips_per_singer +
                               c);
      const double lead = clip_rng.Uniform(1.0, 1.8) * scale;
      const double v1 = clip_rng.Uniform(2.4, 3.2) * scale;
      const double mid = clip_rng.Uniform(0.8, 1.4) * scale;
      const double tail = clip_rng.Uniform(0.8, 1.2) * scale;
      const double v2 = clip_seconds - lead - v1 - mid - tail;
      SongRecipe recipe;
      recipe.sections = {{lead, false},
                         {v1, true},
                         {mid, false},
                         {v2, true},
                         {tail, false}};
      recipe.singer = s;
      recipe.tempo_bpm = clip_rng.Uniform(85.0, 125.0);
      recipe.seed = clip_rng.NextU64();
      SongOutput song = SynthSong(recipe, profiles);

      const std::string clip_name = IndexedName("clip_", c);
      const std::string rel_wav =
          "wavs/" + singer_dir + "/" + clip_name + ".wav";
      signal::WriteWav((fs::path(out_dir) / rel_wav).string(), song.mixture);
      seg_items.push_back({rel_wav, song.timeline});
      cls_items.push_back({rel_wav, profiles[s].name});

      std::vector<signal::AudioBuffer> mix_snips =
          signal::Chop(song.mixture, 6.0);
      std::vector<signal::AudioBuffer> voc_snips =
          signal::Chop(song.vocal_stem, 6.0);
      for (size_t i = 0; i < mix_snips.size(); ++i) {
        if (signal::Rms(voc_snips[i]) < 1e-3) continue;  // useless pair
        const std::string stem = "pairs/" + singer_dir + "/" + clip_name +
                                 "_" + std::to_string(i);
        signal::WriteWav((fs::path(out_dir) / (stem + "_mix.wav")).string(),
                         mix_snips[i]);
        signal::WriteWav((fs::path(out_dir) / (stem + "_voc.wav")).string(),
                         voc_snips[i]);
        pair_items.push_back({stem + "_mix.wav", stem + "_voc.wav"});
      }
    }
  }

  DatasetPaths paths;
  paths.segmentation_manifest =
      (fs::path(out_dir) / "segmentation.jsonl").string();
  paths.pair_manifest = (fs::path(out_dir) / "pairs.jsonl").string();
  paths.classification_manifest =
      (fs::path(out_dir) / "classification.jsonl").string();
  paths.dataset_json = (fs::path(out_dir) / "dataset.json").string();
  WriteSegmentationManifest(paths.segmentation_manifest, seg_items);
  WritePairManifest(paths.pair_manifest, pair_items);
  WriteClassificationManifest(paths.classification_manifest, cls_items);

  nlohmann::json ds;
  ds["seed"] = seed;
  ds["num_singers"] = num_singers;
  ds["clips_per_singer"] = clips_per_singer;
  ds["clip_seconds"] = clip_seconds;
  ds["num_clips"] = num_singers * clips_per_singer;
  ds["num_pairs"] = pair_items.size();
  ds["profiles"] = nlohmann::json::array();
  for (const SingerProfile& p : profiles) {
    ds["profiles"].push_back(
        {{"name", p.name},
         {"f0_lo", p.f0_lo},
         {"f0_hi", p.f0_hi},
         {"vibrato_rate", p.vibrato_rate},
         {"vibrato_depth", p.vibrato_depth},
         {"formants", {p.formants[0], p.formants[1], p.formants[2]}},
         {"breathiness", p.breathiness}});
  }
  std::ofstream out(paths.dataset_json);
  if (!out) {
    Throw(ErrorCode::kIoFailure, "cannot write " + paths.dataset_json);
  }
  out << ds.dump(2) << "\n";
  return paths;
}

}  // namespace voxid::synth
