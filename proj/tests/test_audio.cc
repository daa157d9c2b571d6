// voxid/test_audio.cc

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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "test_util.h"
#include "voxid/audio.h"
#include "voxid/error.h"

using namespace voxid;
using namespace voxid::testing;

namespace {

void PutU32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}
void PutU16(std::string& s, uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

// Hand-rolled RIFF writer so reader tests do not depend on WriteWav.
std::string WavBytes(uint16_t format, uint16_t channels, uint32_t rate,
                     uint16_t bits, const std::string& payload) {
  std::string s;
  s += "RIFF";
  PutU32(s, 36 + static_cast<uint32_t>(payload.size()));
  s += "WAVEfmt ";
  PutU32(s, 16);
  PutU16(s, format);
  PutU16(s, channels);
  PutU32(s, rate);
  PutU32(s, rate * channels * bits / 8);
  PutU16(s, channels * bits / 8);
  PutU16(s, bits);
  s += "data";
  PutU32(s, static_cast<uint32_t>(payload.size()));
  s += payload;
  return s;
}

void WriteFile(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string Pcm16Payload(const std::vector<int16_t>& samples) {
  std::string s;
  for (int16_t v : samples) PutU16(s, static_cast<uint16_t>(v));
  return s;
}

std::string Float32Payload(const std::vector<float>& samples) {
  std::string s;
  for (float v : samples) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    PutU32(s, bits);
  }
  return s;
}

}  // namespace

TEST_CASE("read_wav decodes mono pcm16 zeros") {
  TempDir tmp("wav_zero");
  const std::string path = tmp.Path("z.wav");
  WriteFile(path, WavBytes(1, 1, 16000, 16,
                           Pcm16Payload(std::vector<int16_t>(16000, 0))));
  signal::AudioBuffer a = signal::ReadWav(path);
  CHECK(a.sample_rate == 16000);
  REQUIRE(a.NumSamples() == 16000);
  for (double x : a.samples) CHECK(x == 0.0);
}

TEST_CASE("read_wav mixes symmetric stereo to silence") {
  TempDir tmp("wav_stereo");
  const std::string path = tmp.Path("s.wav");
  std::vector<int16_t> interleaved;
  for (int i = 0; i < 100; ++i) {
    interleaved.push_back(16384);   // +0.5
    interleaved.push_back(-16384);  // -0.5
  }
  WriteFile(path, WavBytes(1, 2, 8000, 16, Pcm16Payload(interleaved)));
  signal::AudioBuffer a = signal::ReadWav(path);
  CHECK(a.sample_rate == 8000);
  REQUIRE(a.NumSamples() == 100);
  for (double x : a.samples) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("read_wav scales int16 minimum to exactly -1") {
  TempDir tmp("wav_min");
  const std::string path = tmp.Path("m.wav");
  WriteFile(path, WavBytes(1, 1, 16000, 16, Pcm16Payload({-32768, 32767})));
  signal::AudioBuffer a = signal::ReadWav(path);
  REQUIRE(a.NumSamples() == 2);
  CHECK(a.samples[0] == -1.0);
  CHECK(a.samples[1] == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("read_wav decodes float32 and clamps out-of-range samples") {
  TempDir tmp("wav_f32");
  const std::string path = tmp.Path("f.wav");
  WriteFile(path, WavBytes(3, 1, 16000, 32,
                           Float32Payload({0.25f, -1.5f, 1.5f, -0.75f})));
  signal::AudioBuffer a = signal::ReadWav(path);
  REQUIRE(a.NumSamples() == 4);
  CHECK(a.samples[0] == doctest::Approx(0.25));
  CHECK(a.samples[1] == -1.0);
  CHECK(a.samples[2] == 1.0);
  CHECK(a.samples[3] == doctest::Approx(-0.75));
}

TEST_CASE("read_wav rejects unsupported codecs") {
  TempDir tmp("wav_codec");
  const std::string path = tmp.Path("u.wav");
  WriteFile(path, WavBytes(7, 1, 8000, 8, std::string(64, '\0')));
  try {
    signal::ReadWav(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedCodec);
  }
}

TEST_CASE("read_wav rejects truncated payloads") {
  TempDir tmp("wav_trunc");
  const std::string path = tmp.Path("t.wav");
  std::string bytes =
      WavBytes(1, 1, 16000, 16, Pcm16Payload(std::vector<int16_t>(100, 5)));
  bytes.resize(bytes.size() - 50);
  WriteFile(path, bytes);
  try {
    signal::ReadWav(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTruncatedFile);
  }
}

TEST_CASE("read_wav rejects zero-length audio") {
  TempDir tmp("wav_empty");
  const std::string path = tmp.Path("e.wav");
  WriteFile(path, WavBytes(1, 1, 16000, 16, ""));
  try {
    signal::ReadWav(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyAudio);
  }
}

TEST_CASE("write_wav then read_wav round trips within quantization") {
  TempDir tmp("wav_rt");
  const std::string path = tmp.Path("r.wav");
  signal::AudioBuffer a = NoiseBuffer(0.25, 77, 22050, 0.4);
  signal::WriteWav(path, a);
  signal::AudioBuffer b = signal::ReadWav(path);
  CHECK(b.sample_rate == 22050);
  REQUIRE(b.NumSamples() == a.NumSamples());
  for (int64_t i = 0; i < a.NumSamples(); ++i) {
    // Positive full scale clips to 32767/32768, costing one extra half-step.
    const double limit = a.samples[i] >= 32767.0 / 32768.0 ? 1.0 / 32768.0
                                                           : 0.5 / 32768.0;
    CHECK(std::abs(a.samples[i] - b.samples[i]) <= limit + 1e-12);
  }
}

TEST_CASE("resample at the source rate is bit-identical") {
  signal::AudioBuffer a = NoiseBuffer(0.5, 3, 16000);
  signal::AudioBuffer b = signal::Resample(a, 16000);
  REQUIRE(b.NumSamples() == a.NumSamples());
  CHECK(std::memcmp(a.samples.data(), b.samples.data(),
                    a.samples.size() * sizeof(double)) == 0);
}

TEST_CASE("resample output length follows the rate ratio") {
  signal::AudioBuffer a = NoiseBuffer(1.0, 4, 44100);
  signal::AudioBuffer b = signal::Resample(a, 16000);
  CHECK(b.sample_rate == 16000);
  CHECK(b.NumSamples() ==
        std::llround(static_cast<double>(a.NumSamples()) * 16000 / 44100));
}

TEST_CASE("resample keeps a 440 Hz tone at 440 Hz") {
  signal::AudioBuffer a = SineBuffer(1.0, 440.0, 48000);
  signal::AudioBuffer b = signal::Resample(a, 16000);
  REQUIRE(b.NumSamples() >= 8192);
  // naive DFT of an interior slice; peak bin must land on 440 Hz +-1 bin
  const int n = 4096;
  const int off = 2000;
  int best_bin = 0;
  double best_mag = -1.0;
  for (int k = 1; k < n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ang = -2.0 * kTestPi * k * i / n;
      re += b.samples[off + i] * std::cos(ang);
      im += b.samples[off + i] * std::sin(ang);
    }
    const double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best_bin = k;
    }
  }
  const double bin_hz = 16000.0 / n;
  CHECK(std::abs(best_bin * bin_hz - 440.0) <= bin_hz);
}

TEST_CASE("resample preserves a constant signal away from the edges") {
  signal::AudioBuffer a;
  a.sample_rate = 48000;
  a.samples.assign(48000, 0.25);
  signal::AudioBuffer b = signal::Resample(a, 16000);
  for (int64_t i = 64; i < b.NumSamples() - 64; ++i) {
    CHECK(std::abs(b.samples[i] - 0.25) < 1e-3);
  }
}

TEST_CASE("chop splits exact multiples cleanly") {
  signal::AudioBuffer a = NoiseBuffer(12.0, 5, 16000);
  auto parts = signal::Chop(a, 6.0);
  REQUIRE(parts.size() == 2);
  for (const auto& p : parts) {
    CHECK(p.NumSamples() == 6 * 16000);
    CHECK(p.sample_rate == 16000);
  }
  CHECK(parts[0].samples[0] == a.samples[0]);
  CHECK(parts[1].samples[0] == a.samples[6 * 16000]);
}

TEST_CASE("chop drops a remainder under half a snippet") {
  signal::AudioBuffer a = NoiseBuffer(14.0, 6, 16000);
  auto parts = signal::Chop(a, 6.0);
  CHECK(parts.size() == 2);
}

TEST_CASE("chop zero-pads a remainder of at least half a snippet") {
  signal::AudioBuffer a = NoiseBuffer(15.5, 7, 16000);
  auto parts = signal::Chop(a, 6.0);
  REQUIRE(parts.size() == 3);
  CHECK(parts[2].NumSamples() == 6 * 16000);
  const int64_t data_len = a.NumSamples() - 2 * 6 * 16000;
  for (int64_t i = 0; i < data_len; ++i) {
    CHECK(parts[2].samples[i] == a.samples[2 * 6 * 16000 + i]);
  }
  for (int64_t i = data_len; i < parts[2].NumSamples(); ++i) {
    CHECK(parts[2].samples[i] == 0.0);
  }
}

TEST_CASE("chop of empty audio returns no snippets") {
  signal::AudioBuffer a;
  a.sample_rate = 16000;
  CHECK(signal::Chop(a, 6.0).empty());
}

TEST_CASE("rms of simple signals") {
  signal::AudioBuffer c;
  c.sample_rate = 16000;
  c.samples.assign(1000, 0.5);
  CHECK(signal::Rms(c) == doctest::Approx(0.5));
  signal::AudioBuffer s = SineBuffer(1.0, 100.0, 16000, 0.6);
  CHECK(signal::Rms(s) == doctest::Approx(0.6 / std::sqrt(2.0)).epsilon(1e-3));
}
