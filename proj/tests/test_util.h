// voxid/test_util.h

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

// Independent test-side oracles: everything here recomputes results with
// naive direct summation, never by calling the code under test.

#ifndef VOXID_TEST_UTIL_H_
#define VOXID_TEST_UTIL_H_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxid/audio.h"
#include "voxid/rng.h"
#include "voxid/segmenter.h"
#include "voxid/stft.h"
#include "voxid/timeline.h"

namespace voxid::testing {

constexpr double kTestPi = 3.14159265358979323846;

inline signal::AudioBuffer NoiseBuffer(double seconds, uint64_t seed,
                                       int rate = 16000,
                                       double amplitude = 0.3) {
  Rng rng(seed);
  signal::AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(static_cast<size_t>(std::llround(seconds * rate)));
  for (double& x : a.samples) {
    x = std::clamp(amplitude * rng.NextGaussian(), -1.0, 1.0);
  }
  return a;
}

inline signal::AudioBuffer SineBuffer(double seconds, double freq, int rate,
                                      double amplitude = 0.5) {
  signal::AudioBuffer a;
  a.sample_rate = rate;
  a.samples.resize(static_cast<size_t>(std::llround(seconds * rate)));
  for (size_t i = 0; i < a.samples.size(); ++i) {
    a.samples[i] = amplitude * std::sin(2.0 * kTestPi * freq * i / rate);
  }
  return a;
}

// Unique per-process scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("voxid_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string Path(const std::string& name) const {
    return (dir_ / name).string();
  }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// ---- naive DFT / spectrogram / MFCC oracles ----

// Mirror framing used by the pipeline contract: frame f covers samples
// [f*hop - fft/2, f*hop + fft/2) with reflection about the signal endpoints.
inline int64_t OracleMirror(int64_t i, int64_t len) {
  if (len == 1) return 0;
  const int64_t period = 2 * (len - 1);
  int64_t p = i % period;
  if (p < 0) p += period;
  return p < len ? p : period - p;
}

struct OracleSpectrogram {
  std::vector<std::vector<std::complex<double>>> bins;  // [frames][fft/2+1]
};

inline OracleSpectrogram NaiveSpectrogram(const signal::AudioBuffer& a,
                                          int fft, int hop) {
  const int64_t len = a.NumSamples();
  const int64_t frames = (len + hop - 1) / hop;
  const int nbins = fft / 2 + 1;
  OracleSpectrogram out;
  out.bins.assign(frames,
                  std::vector<std::complex<double>>(nbins, {0.0, 0.0}));
  std::vector<double> frame(fft);
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t start = f * hop - fft / 2;
    for (int n = 0; n < fft; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * kTestPi * n / fft);
      frame[n] = w * a.samples[OracleMirror(start + n, len)];
    }
    for (int k = 0; k < nbins; ++k) {
      double re = 0.0, im = 0.0;
      for (int n = 0; n < fft; ++n) {
        const double ang = -2.0 * kTestPi * k * n / fft;
        re += frame[n] * std::cos(ang);
        im += frame[n] * std::sin(ang);
      }
      out.bins[f][k] = {re, im};
    }
  }
  return out;
}

// Full MFCC oracle: naive DFT, explicit HTK-mel triangle sums, explicit
// orthonormal DCT-II sums.
inline std::vector<std::vector<double>> NaiveMfcc(
    const signal::AudioBuffer& a, int fft, int hop, int num_filters,
    int num_coeffs) {
  const OracleSpectrogram spec = NaiveSpectrogram(a, fft, hop);
  const int nbins = fft / 2 + 1;
  const double bin_hz = static_cast<double>(a.sample_rate) / fft;
  const double f_hi = a.sample_rate / 2.0;

  auto hz_to_mel = [](double f) {
    return 2595.0 * std::log10(1.0 + f / 700.0);
  };
  auto mel_to_hz = [](double m) {
    return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
  };
  const double mel_hi = hz_to_mel(f_hi);
  std::vector<double> edges(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i) {
    edges[i] = mel_to_hz(mel_hi * i / (num_filters + 1));
  }

  std::vector<std::vector<double>> out(
      spec.bins.size(), std::vector<double>(num_coeffs, 0.0));
  for (size_t fr = 0; fr < spec.bins.size(); ++fr) {
    std::vector<double> log_e(num_filters);
    for (int m = 0; m < num_filters; ++m) {
      double acc = 0.0;
      for (int b = 0; b < nbins; ++b) {
        const double f = b * bin_hz;
        double w = 0.0;
        if (f > edges[m] && f < edges[m + 1]) {
          w = (f - edges[m]) / (edges[m + 1] - edges[m]);
        } else if (f >= edges[m + 1] && f < edges[m + 2]) {
          w = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        }
        acc += w * std::norm(spec.bins[fr][b]);
      }
      log_e[m] = std::log(std::max(acc, 1e-10));
    }
    for (int k = 0; k < num_coeffs; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / num_filters)
                                  : std::sqrt(2.0 / num_filters);
      double acc = 0.0;
      for (int m = 0; m < num_filters; ++m) {
        acc += log_e[m] * std::cos(kTestPi * (m + 0.5) * k / num_filters);
      }
      out[fr][k] = scale * acc;
    }
  }
  return out;
}

// ---- exhaustive 2-state MAP oracle ----

// Enumerates all 2^T label sequences and returns the log-likelihood
// maximizer.  Only usable where the maximizer is unique.
inline std::vector<SegmentLabel> EnumerateMapPath(
    const std::vector<double>& p_vocal, const seg::TransitionModel& tm) {
  const int T = static_cast<int>(p_vocal.size());
  auto emit = [&](int t, int s) {
    return std::log(s == 1 ? p_vocal[t] : 1.0 - p_vocal[t]);
  };
  auto trans = [&](int from, int to) {
    const double stay = from == 1 ? tm.p_stay_vocal : tm.p_stay_nonvocal;
    return std::log(from == to ? stay : 1.0 - stay);
  };
  double best = -1e300;
  uint32_t best_mask = 0;
  for (uint32_t mask = 0; mask < (1u << T); ++mask) {
    const int s0 = mask & 1;
    double score =
        std::log(s0 == 1 ? tm.prior_vocal : 1.0 - tm.prior_vocal) +
        emit(0, s0);
    for (int t = 1; t < T; ++t) {
      const int prev = (mask >> (t - 1)) & 1;
      const int cur = (mask >> t) & 1;
      score += trans(prev, cur) + emit(t, cur);
    }
    if (score > best) {
      best = score;
      best_mask = mask;
    }
  }
  std::vector<SegmentLabel> labels(T);
  for (int t = 0; t < T; ++t) {
    labels[t] = ((best_mask >> t) & 1) ? SegmentLabel::kVocal
                                       : SegmentLabel::kNonVocal;
  }
  return labels;
}

inline int CountSwitches(const std::vector<SegmentLabel>& labels) {
  int switches = 0;
  for (size_t t = 1; t < labels.size(); ++t) {
    if (labels[t] != labels[t - 1]) ++switches;
  }
  return switches;
}

inline double RelativeL2(const std::vector<double>& a,
                         const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  const size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace voxid::testing

#endif  // VOXID_TEST_UTIL_H_
