// voxid/test_synth.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "test_util.h"
#include "voxid/audio.h"
#include "voxid/error.h"
#include "voxid/manifest.h"
#include "voxid/synth.h"

using namespace voxid;
using namespace voxid::synth;
using voxid::testing::TempDir;

namespace {

double Rms(const std::vector<double>& v) {
  double acc = 0.0;
  for (double s : v) acc += s * s;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Fundamental estimate by the normalized-autocorrelation peak over a lag
// band; independent of the renderer under test.
double AutocorrPitch(const std::vector<double>& x, int begin, int window,
                     double f_lo, double f_hi, int rate) {
  const int lag_lo = static_cast<int>(rate / f_hi);
  const int lag_hi = static_cast<int>(rate / f_lo);
  double best = -1.0;
  int best_lag = lag_lo;
  for (int lag = lag_lo; lag <= lag_hi; ++lag) {
    double num = 0.0, e0 = 0.0, e1 = 0.0;
    for (int i = begin; i < begin + window; ++i) {
      num += x[i] * x[i + lag];
      e0 += x[i] * x[i];
      e1 += x[i + lag] * x[i + lag];
    }
    const double score = num / std::sqrt(e0 * e1 + 1e-12);
    if (score > best) {
      best = score;
      best_lag = lag;
    }
  }
  return static_cast<double>(rate) / best_lag;
}

SingerProfile NarrowProfile() {
  SingerProfile p;
  p.name = "test";
  p.f0_lo = 185.0;
  p.f0_hi = 215.0;
  p.vibrato_rate = 5.0;
  p.vibrato_depth = 15.0;
  p.formants[0] = 600.0;
  p.formants[1] = 1200.0;
  p.formants[2] = 2400.0;
  p.breathiness = 0.05;
  return p;
}

SongRecipe BasicRecipe(int singer = 0) {
  SongRecipe r;
  r.sections = {{2.0, false}, {3.0, true}, {1.5, false}, {3.0, true}};
  r.singer = singer;
  r.tempo_bpm = 110.0;
  r.seed = 7;
  return r;
}

std::string Slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

}  // namespace

TEST_CASE("vocal rendering is pure in profile, duration, and seed") {
  SingerProfile p = NarrowProfile();
  signal::AudioBuffer a = SynthVocal(p, 1.0, 3);
  signal::AudioBuffer b = SynthVocal(p, 1.0, 3);
  CHECK(a.samples == b.samples);
  signal::AudioBuffer c = SynthVocal(p, 1.0, 4);
  CHECK(a.samples != c.samples);
  CHECK(a.sample_rate == 16000);
  CHECK(a.NumSamples() == 16000);
}

TEST_CASE("vocal pitch stays inside the profile's range") {
  SingerProfile p = NarrowProfile();
  signal::AudioBuffer v = SynthVocal(p, 1.5, 5);
  // examine three interior windows, away from onset transients
  for (int begin : {4000, 10000, 16000}) {
    const double f0 =
        AutocorrPitch(v.samples, begin, 1600, 150.0, 260.0, 16000);
    CHECK(f0 > 170.0);
    CHECK(f0 < 230.0);
  }
}

TEST_CASE("vocal and instrumental levels land in their target bands") {
  SingerProfile p = NarrowProfile();
  for (uint64_t seed : {1, 2, 3}) {
    signal::AudioBuffer v = SynthVocal(p, 1.0, seed);
    const double rms = Rms(v.samples);
    CHECK(rms > 0.05);
    CHECK(rms < 0.35);
    signal::AudioBuffer inst = SynthInstrumental(2.0, seed);
    const double irms = Rms(inst.samples);
    CHECK(irms >= 0.05);
    CHECK(irms <= 0.5);
    CHECK(inst.samples == SynthInstrumental(2.0, seed).samples);
  }
}

TEST_CASE("profile validation rejects out-of-band settings") {
  SingerProfile p = NarrowProfile();
  p.f0_lo = 60.0;  // below the 80 Hz floor
  CHECK_THROWS_AS(SynthVocal(p, 1.0, 1), Error);
  p = NarrowProfile();
  p.f0_hi = 1200.0;
  CHECK_THROWS_AS(SynthVocal(p, 1.0, 1), Error);
  p = NarrowProfile();
  p.formants[1] = 500.0;  // not increasing
  CHECK_THROWS_AS(SynthVocal(p, 1.0, 1), Error);
  p = NarrowProfile();
  p.breathiness = 0.7;
  CHECK_THROWS_AS(SynthVocal(p, 1.0, 1), Error);
  p = NarrowProfile();
  CHECK_THROWS_AS(SynthVocal(p, 0.0, 1), Error);
}

TEST_CASE("songs are exactly additive with a bounded peak") {
  std::vector<SingerProfile> profiles = {NarrowProfile()};
  SongOutput song = SynthSong(BasicRecipe(), profiles);
  const int64_t n = song.mixture.NumSamples();
  REQUIRE(n == 16000 * 19 / 2);  // 9.5 s
  REQUIRE(song.vocal_stem.NumSamples() == n);
  REQUIRE(song.instrumental.NumSamples() == n);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(song.mixture.samples[i] ==
          song.vocal_stem.samples[i] + song.instrumental.samples[i]);
  }
  double peak = 0.0;
  for (double s : song.mixture.samples) peak = std::max(peak, std::abs(s));
  CHECK(peak <= 0.98 + 1e-12);
  CHECK(peak > 0.01);  // actually rendered something
}

TEST_CASE("the vocal stem is silent outside vocal sections") {
  std::vector<SingerProfile> profiles = {NarrowProfile()};
  SongOutput song = SynthSong(BasicRecipe(), profiles);
  // sections: [0,2) non, [2,5) vocal, [5,6.5) non, [6.5,9.5) vocal
  for (int64_t i = 0; i < 16000 * 2; ++i) {
    CHECK(song.vocal_stem.samples[i] == 0.0);
  }
  for (int64_t i = 16000 * 5; i < 16000 * 13 / 2; ++i) {
    CHECK(song.vocal_stem.samples[i] == 0.0);
  }
  // and carries energy inside them
  double vocal_energy = 0.0;
  for (int64_t i = 16000 * 2; i < 16000 * 5; ++i) {
    vocal_energy += song.vocal_stem.samples[i] * song.vocal_stem.samples[i];
  }
  CHECK(vocal_energy > 0.0);
}

TEST_CASE("song timelines are valid and coalesced") {
  std::vector<SingerProfile> profiles = {NarrowProfile()};
  SongOutput song = SynthSong(BasicRecipe(), profiles);
  CHECK(song.timeline.Valid());
  REQUIRE(song.timeline.segments.size() == 4);
  for (size_t i = 1; i < song.timeline.segments.size(); ++i) {
    CHECK(song.timeline.segments[i].label !=
          song.timeline.segments[i - 1].label);
  }
  CHECK(song.timeline.TotalSeconds() == doctest::Approx(9.5));
  CHECK(song.timeline.LabelAt(1.0) == SegmentLabel::kNonVocal);
  CHECK(song.timeline.LabelAt(3.0) == SegmentLabel::kVocal);
  CHECK(song.timeline.LabelAt(6.0) == SegmentLabel::kNonVocal);
  CHECK(song.timeline.LabelAt(8.0) == SegmentLabel::kVocal);

  // adjacent same-label sections merge into one segment
  SongRecipe merged = BasicRecipe();
  merged.sections = {{2.0, false}, {2.0, true}, {2.5, true}, {2.0, false}};
  SongOutput song2 = SynthSong(merged, profiles);
  REQUIRE(song2.timeline.segments.size() == 3);
  CHECK(song2.timeline.segments[1].end_s == doctest::Approx(6.5));
}

TEST_CASE("song rendering is deterministic") {
  std::vector<SingerProfile> profiles = {NarrowProfile()};
  SongOutput a = SynthSong(BasicRecipe(), profiles);
  SongOutput b = SynthSong(BasicRecipe(), profiles);
  CHECK(a.mixture.samples == b.mixture.samples);
  CHECK(a.vocal_stem.samples == b.vocal_stem.samples);
  SongRecipe other = BasicRecipe();
  other.seed = 8;
  SongOutput c = SynthSong(other, profiles);
  CHECK(a.mixture.samples != c.mixture.samples);
}

TEST_CASE("song recipes are validated") {
  std::vector<SingerProfile> profiles = {NarrowProfile()};
  SongRecipe r = BasicRecipe();
  r.sections.clear();
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe();
  r.sections[1].duration_s = -1.0;
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe();
  r.sections = {{3.0, false}, {3.0, true}};  // 6 s < 8 s minimum
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe();
  for (auto& s : r.sections) s.vocal = false;
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe();
  for (auto& s : r.sections) s.vocal = true;
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe(3);  // only one profile supplied
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);

  r = BasicRecipe();
  r.tempo_bpm = 0.0;
  CHECK_THROWS_AS(SynthSong(r, profiles), Error);
}

TEST_CASE("generated profiles have disjoint pitch ranges") {
  Rng rng(9);
  std::vector<SingerProfile> profiles = MakeProfiles(6, rng);
  REQUIRE(profiles.size() == 6);
  CHECK(profiles[0].name == "singer_00");
  CHECK(profiles[5].name == "singer_05");
  for (size_t i = 0; i < profiles.size(); ++i) {
    const SingerProfile& p = profiles[i];
    CHECK(p.f0_lo >= 80.0);
    CHECK(p.f0_hi <= 1000.0);
    CHECK(p.f0_lo < p.f0_hi);
    CHECK(p.formants[0] < p.formants[1]);
    CHECK(p.formants[1] < p.formants[2]);
    CHECK(p.breathiness <= 0.5);
    for (size_t j = i + 1; j < profiles.size(); ++j) {
      const bool disjoint = p.f0_hi < profiles[j].f0_lo ||
                            profiles[j].f0_hi < p.f0_lo;
      CHECK(disjoint);
    }
  }

  Rng rng2(9);
  std::vector<SingerProfile> again = MakeProfiles(6, rng2);
  for (size_t i = 0; i < profiles.size(); ++i) {
    CHECK(profiles[i].f0_lo == again[i].f0_lo);
    CHECK(profiles[i].formants[2] == again[i].formants[2]);
  }

  Rng rng3(10);
  CHECK_THROWS_AS(MakeProfiles(18, rng3), Error);
}

TEST_CASE("dataset builds are complete and self-consistent") {
  TempDir tmp("synth_dataset");
  DatasetPaths paths = BuildDataset(2, 1, 8.0, tmp.Path("data"), 11);

  for (const std::string& p :
       {paths.segmentation_manifest, paths.pair_manifest,
        paths.classification_manifest, paths.dataset_json}) {
    CHECK(std::filesystem::exists(p));
  }

  std::vector<SegmentationItem> seg =
      ReadSegmentationManifest(paths.segmentation_manifest);
  REQUIRE(seg.size() == 2);
  for (const SegmentationItem& item : seg) {
    signal::AudioBuffer clip = signal::ReadWav(item.path);
    CHECK(clip.NumSamples() == 16000 * 8);
    CHECK(item.timeline.Valid());
    CHECK(item.timeline.TotalSeconds() == doctest::Approx(8.0));
  }

  std::vector<PairItem> pairs = ReadPairManifest(paths.pair_manifest);
  REQUIRE(!pairs.empty());
  for (const PairItem& pair : pairs) {
    signal::AudioBuffer mix = signal::ReadWav(pair.mixture);
    signal::AudioBuffer voc = signal::ReadWav(pair.vocal);
    CHECK(mix.NumSamples() == voc.NumSamples());
    CHECK(mix.NumSamples() == 16000 * 6);  // snippet length
  }

  std::vector<ClassificationItem> cls =
      ReadClassificationManifest(paths.classification_manifest);
  REQUIRE(cls.size() == 2);
  CHECK(cls[0].singer != cls[1].singer);
  for (const ClassificationItem& item : cls) {
    CHECK(std::filesystem::exists(item.path));
  }

  nlohmann::json meta = nlohmann::json::parse(Slurp(paths.dataset_json));
  CHECK(meta.at("seed").get<uint64_t>() == 11);
  CHECK(meta.at("num_singers").get<int>() == 2);
  CHECK(meta.at("clips_per_singer").get<int>() == 1);
  CHECK(meta.at("profiles").size() == 2);
}

TEST_CASE("dataset builds are byte-identical across runs") {
  TempDir tmp("synth_repro");
  DatasetPaths a = BuildDataset(2, 1, 8.0, tmp.Path("a"), 12);
  DatasetPaths b = BuildDataset(2, 1, 8.0, tmp.Path("b"), 12);

  std::vector<std::pair<std::string, std::string>> dirs;
  for (auto& entry :
       std::filesystem::recursive_directory_iterator(tmp.Path("a"))) {
    if (!entry.is_regular_file()) continue;
    const std::string rel =
        std::filesystem::relative(entry.path(), tmp.Path("a")).string();
    dirs.push_back({entry.path().string(), tmp.Path("b") + "/" + rel});
  }
  REQUIRE(!dirs.empty());
  for (const auto& [pa, pb] : dirs) {
    REQUIRE(std::filesystem::exists(pb));
    CHECK(Slurp(pa) == Slurp(pb));
  }

  DatasetPaths c = BuildDataset(2, 1, 8.0, tmp.Path("c"), 13);
  CHECK(Slurp(a.dataset_json) != Slurp(c.dataset_json));
}

TEST_CASE("dataset construction validates its arguments") {
  TempDir tmp("synth_badargs");
  CHECK_THROWS_AS(BuildDataset(1, 1, 8.0, tmp.Path("x"), 1), Error);
  CHECK_THROWS_AS(BuildDataset(2, 0, 8.0, tmp.Path("x"), 1), Error);
  CHECK_THROWS_AS(BuildDataset(2, 1, 5.0, tmp.Path("x"), 1), Error);
}
