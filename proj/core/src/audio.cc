// voxid/audio.cc

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

#include "voxid/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "voxid/error.h"

namespace voxid::signal {

namespace {

constexpr uint32_t FourCC(char a, char b, char c, char d) {
  return static_cast<uint32_t>(static_cast<unsigned char>(a)) |
         (static_cast<uint32_t>(static_cast<unsigned char>(b)) << 8) |
         (static_cast<uint32_t>(static_cast<unsigned char>(c)) << 16) |
         (static_cast<uint32_t>(static_cast<unsigned char>(d)) << 24);
}

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

double Clamp1(double x) { return std::min(1.0, std::max(-1.0, x)); }

struct FmtInfo {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

}  // namespace

AudioBuffer ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorCode::kIoFailure, "cannot open WAV file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12)
    Throw(ErrorCode::kTruncatedFile,
          "truncated WAV (no RIFF header): " + path);
  if (ReadU32(&bytes[0]) != FourCC('R', 'I', 'F', 'F') ||
      ReadU32(&bytes[8]) != FourCC('W', 'A', 'V', 'E'))
    Throw(ErrorCode::kIoFailure, "not a RIFF/WAVE file: " + path);

  FmtInfo fmt;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    uint32_t id = ReadU32(&bytes[pos]);
    uint32_t size = ReadU32(&bytes[pos + 4]);
    size_t body = pos + 8;
    if (id == FourCC('f', 'm', 't', ' ')) {
      if (body + 16 > bytes.size())
        Throw(ErrorCode::kTruncatedFile, "truncated fmt chunk: " + path);
      fmt.format = ReadU16(&bytes[body]);
      fmt.channels = ReadU16(&bytes[body + 2]);
      fmt.sample_rate = ReadU32(&bytes[body + 4]);
      fmt.bits_per_sample = ReadU16(&bytes[body + 14]);
      have_fmt = true;
    } else if (id == FourCC('d', 'a', 't', 'a')) {
      if (body + size > bytes.size())
        Throw(ErrorCode::kTruncatedFile,
              "truncated data chunk (header claims " + std::to_string(size) +
                  " bytes, file has " + std::to_string(bytes.size() - body) +
                  "): " + path);
      data = &bytes[body];
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) Throw(ErrorCode::kIoFailure, "missing fmt chunk: " + path);
  if (data == nullptr)
    Throw(ErrorCode::kIoFailure, "missing data chunk: " + path);
  if (fmt.channels != 1 && fmt.channels != 2)
    Throw(ErrorCode::kUnsupportedCodec,
          "unsupported channel count " + std::to_string(fmt.channels) +
              " (expected 1 or 2): " + path);
  if (fmt.sample_rate == 0)
    Throw(ErrorCode::kIoFailure, "zero sample rate: " + path);

  const bool pcm16 = fmt.format == 1 && fmt.bits_per_sample == 16;
  const bool f32 = fmt.format == 3 && fmt.bits_per_sample == 32;
  if (!pcm16 && !f32)
    Throw(ErrorCode::kUnsupportedCodec,
          "unsupported codec (format tag " + std::to_string(fmt.format) +
              ", " + std::to_string(fmt.bits_per_sample) +
              " bits): " + path);

  const int bytes_per_sample = pcm16 ? 2 : 4;
  const int frame_bytes = bytes_per_sample * fmt.channels;
  const int64_t frames = data_size / frame_bytes;
  if (frames == 0)
    Throw(ErrorCode::kEmptyAudio, "zero-length audio: " + path);

  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  for (int64_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < fmt.channels; ++c) {
      const uint8_t* p = data + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        int16_t s;
        std::memcpy(&s, p, 2);
        v = static_cast<double>(s) / 32768.0;
      } else {
        float f;
        std::memcpy(&f, p, 4);
        if (!std::isfinite(f))
          Throw(ErrorCode::kNonFinite,
                "non-finite sample at frame " + std::to_string(i) + ": " +
                    path);
        v = static_cast<double>(f);
      }
      acc += v;
    }
    out.samples[i] = Clamp1(acc / fmt.channels);
  }
  return out;
}

void WriteWav(const std::string& path, const AudioBuffer& audio) {
  if (audio.sample_rate <= 0)
    Throw(ErrorCode::kInvalidArgument, "WriteWav: sample_rate must be > 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) Throw(ErrorCode::kIoFailure, "cannot create WAV file: " + path);

  const uint32_t n = static_cast<uint32_t>(audio.samples.size());
  const uint32_t data_size = n * 2;
  const uint32_t riff_size = 36 + data_size;
  const uint32_t rate = static_cast<uint32_t>(audio.sample_rate);
  const uint32_t byte_rate = rate * 2;

  auto put_u32 = [&](uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16),
                    static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
  };

  out.write("RIFF", 4);
  put_u32(riff_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(rate);
  put_u32(byte_rate);
  put_u16(2);   // block align
  put_u16(16);  // bits per sample
  out.write("data", 4);
  put_u32(data_size);
  for (uint32_t i = 0; i < n; ++i) {
    double v = Clamp1(audio.samples[i]);
    int32_t q = static_cast<int32_t>(std::lrint(v * 32768.0));
    q = std::min<int32_t>(32767, std::max<int32_t>(-32768, q));
    put_u16(static_cast<uint16_t>(static_cast<int16_t>(q)));
  }
  if (!out) Throw(ErrorCode::kIoFailure, "short write: " + path);
}

namespace {

// zeroth-order modified Bessel function, power series
double BesselI0(double x) {
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double Sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = 3.14159265358979323846 * x;
  return std::sin(px) / px;
}

}  // namespace

AudioBuffer Resample(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0)
    Throw(ErrorCode::kInvalidArgument, "Resample: target_rate must be > 0");
  if (audio.sample_rate <= 0)
    Throw(ErrorCode::kInvalidArgument, "Resample: source rate must be > 0");
  if (target_rate == audio.sample_rate) return audio;

  const int64_t in_len = audio.NumSamples();
  const double ratio =
      static_cast<double>(target_rate) / audio.sample_rate;
  const int64_t out_len =
      static_cast<int64_t>(std::llround(in_len * ratio));

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.assign(out_len, 0.0);
  if (in_len == 0) return out;

  constexpr int kTaps = 64;
  constexpr double kBeta = 8.0;
  // cutoff slightly below the narrower Nyquist, in source-rate units
  const double cutoff = 0.95 * std::min(1.0, ratio);
  const double i0_beta = BesselI0(kBeta);

  for (int64_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;  // source position
    const int64_t left = static_cast<int64_t>(std::floor(t)) - kTaps / 2 + 1;
    double acc = 0.0, wsum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const int64_t i = left + k;
      const double d = static_cast<double>(i) - t;
      const double u = 2.0 * (d + kTaps / 2.0) / kTaps - 1.0;  // in [-1, 1]
      if (u < -1.0 || u > 1.0) continue;
      const double w =
          BesselI0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
      const double tap = w * cutoff * Sinc(cutoff * d);
      wsum += tap;
      if (i >= 0 && i < in_len) acc += tap * audio.samples[i];
    }
    // normalizing by the actual tap sum keeps DC gain exact
    out.samples[n] = wsum > 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

std::vector<AudioBuffer> Chop(const AudioBuffer& audio,
                              double snippet_seconds) {
  if (snippet_seconds <= 0.0)
    Throw(ErrorCode::kInvalidArgument, "Chop: snippet_seconds must be > 0");
  std::vector<AudioBuffer> out;
  const int64_t n = audio.NumSamples();
  if (n == 0) return out;
  const int64_t snip =
      static_cast<int64_t>(std::llround(snippet_seconds * audio.sample_rate));
  if (snip <= 0)
    Throw(ErrorCode::kInvalidArgument, "Chop: snippet shorter than a sample");

  int64_t start = 0;
  while (start + snip <= n) {
    AudioBuffer b;
    b.sample_rate = audio.sample_rate;
    b.samples.assign(audio.samples.begin() + start,
                     audio.samples.begin() + start + snip);
    out.push_back(std::move(b));
    start += snip;
  }
  const int64_t rem = n - start;
  if (rem * 2 >= snip) {  // at least half a snippet: zero-pad to full length
    AudioBuffer b;
    b.sample_rate = audio.sample_rate;
    b.samples.assign(snip, 0.0);
    std::copy(audio.samples.begin() + start, audio.samples.end(),
              b.samples.begin());
    out.push_back(std::move(b));
  }
  return out;
}

double Rms(const AudioBuffer& audio) {
  if (audio.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : audio.samples) acc += s * s;
  return std::sqrt(acc / audio.samples.size());
}

}  // namespace voxid::signal
