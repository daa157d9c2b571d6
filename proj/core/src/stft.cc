// voxid/stft.cc

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

#include "voxid/stft.h"

#include <algorithm>
#include <cmath>

#include "voxid/error.h"

namespace voxid::signal {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

void CheckConfig(const StftConfig& cfg) {
  if (!IsPowerOfTwo(cfg.fft_size))
    Throw(ErrorCode::kInvalidArgument,
          "fft_size must be a power of two, got " +
              std::to_string(cfg.fft_size));
  if (cfg.hop <= 0 || cfg.hop > cfg.fft_size)
    Throw(ErrorCode::kInvalidArgument,
          "hop must satisfy 0 < hop <= fft_size, got " +
              std::to_string(cfg.hop));
}

// mirror index without repeating the edge sample (numpy 'reflect')
int64_t MirrorIndex(int64_t i, int64_t len) {
  if (len == 1) return 0;
  const int64_t period = 2 * (len - 1);
  int64_t p = i % period;
  if (p < 0) p += period;
  return p < len ? p : period - p;
}

}  // namespace

std::vector<double> HannWindow(int size) {
  std::vector<double> w(size);
  for (int n = 0; n < size; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / size);
  return w;
}

void Fft(std::vector<std::complex<double>>& buf, bool inverse) {
  const size_t n = buf.size();
  if (!IsPowerOfTwo(static_cast<int>(n)))
    Throw(ErrorCode::kInvalidArgument,
          "Fft: length must be a power of two, got " + std::to_string(n));
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(buf[i], buf[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = buf[i + k];
        const std::complex<double> v = buf[i + k + len / 2] * w;
        buf[i + k] = u + v;
        buf[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : buf) x *= scale;
  }
}

ComplexSpectrogram Stft(const AudioBuffer& audio, const StftConfig& cfg) {
  CheckConfig(cfg);
  const int64_t len = audio.NumSamples();
  if (len < 1)
    Throw(ErrorCode::kEmptyAudio, "Stft: input has no samples");

  const int fft = cfg.fft_size;
  const int half = fft / 2;
  const int bins = cfg.NumBins();
  const int64_t frames = (len + cfg.hop - 1) / cfg.hop;
  const std::vector<double> window = HannWindow(fft);

  ComplexSpectrogram out;
  out.config = cfg;
  out.config.sample_rate = audio.sample_rate > 0 ? audio.sample_rate
                                                 : cfg.sample_rate;
  out.source_samples = len;
  out.magnitude.assign(frames, std::vector<double>(bins));
  out.phase.assign(frames, std::vector<double>(bins));

  std::vector<std::complex<double>> buf(fft);
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t start = f * cfg.hop - half;  // center-aligned
    for (int n = 0; n < fft; ++n) {
      const int64_t idx = MirrorIndex(start + n, len);
      buf[n] = window[n] * audio.samples[idx];
    }
    Fft(buf, false);
    for (int b = 0; b < bins; ++b) {
      out.magnitude[f][b] = std::abs(buf[b]);
      out.phase[f][b] = std::arg(buf[b]);
    }
  }
  return out;
}

AudioBuffer Istft(const ComplexSpectrogram& spec) {
  CheckConfig(spec.config);
  const int fft = spec.config.fft_size;
  const int half = fft / 2;
  const int bins = spec.config.NumBins();
  const int64_t frames = spec.NumFrames();
  if (frames == 0) Throw(ErrorCode::kEmptyAudio, "Istft: no frames");
  for (int64_t f = 0; f < frames; ++f)
    if (static_cast<int>(spec.magnitude[f].size()) != bins ||
        static_cast<int>(spec.phase[f].size()) != bins)
      Throw(ErrorCode::kShapeMismatch,
            "Istft: frame " + std::to_string(f) + " has " +
                std::to_string(spec.magnitude[f].size()) + " bins, expected " +
                std::to_string(bins));

  const int64_t out_len =
      spec.source_samples > 0 ? spec.source_samples : frames * spec.config.hop;
  const std::vector<double> window = HannWindow(fft);

  // accumulate in padded coordinates [0, (frames-1)*hop + fft)
  const int64_t padded = (frames - 1) * spec.config.hop + fft;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> env(padded, 0.0);

  std::vector<std::complex<double>> buf(fft);
  for (int64_t f = 0; f < frames; ++f) {
    for (int b = 0; b < bins; ++b) {
      const double m = spec.magnitude[f][b];
      const double p = spec.phase[f][b];
      buf[b] = std::polar(m, p);
    }
    for (int b = bins; b < fft; ++b) buf[b] = std::conj(buf[fft - b]);
    Fft(buf, true);
    const int64_t base = f * spec.config.hop;
    for (int n = 0; n < fft; ++n) {
      acc[base + n] += window[n] * buf[n].real();
      env[base + n] += window[n] * window[n];
    }
  }

  AudioBuffer out;
  out.sample_rate = spec.config.sample_rate;
  out.samples.resize(out_len);
  for (int64_t s = 0; s < out_len; ++s) {
    const int64_t u = s + half;  // frame 0 was centered on sample 0
    double e = u < padded ? env[u] : 0.0;
    double a = u < padded ? acc[u] : 0.0;
    if (e < 1e-8) e = 1.0;  // envelope guard at extreme edges
    out.samples[s] = a / e;
  }
  return out;
}

std::vector<std::vector<double>> Log1pCompress(
    const std::vector<std::vector<double>>& m) {
  std::vector<std::vector<double>> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    out[i].resize(m[i].size());
    for (size_t j = 0; j < m[i].size(); ++j) {
      const double x = m[i][j];
      if (!(x >= 0.0))
        Throw(ErrorCode::kInvalidArgument,
              "Log1pCompress: negative or NaN input at [" +
                  std::to_string(i) + "][" + std::to_string(j) + "] = " +
                  std::to_string(x));
      out[i][j] = std::log1p(x);
    }
  }
  return out;
}

std::vector<std::vector<double>> Expm1Expand(
    const std::vector<std::vector<double>>& m) {
  std::vector<std::vector<double>> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    out[i].resize(m[i].size());
    for (size_t j = 0; j < m[i].size(); ++j)
      out[i][j] = std::max(0.0, std::expm1(m[i][j]));
  }
  return out;
}

}  // namespace voxid::signal
