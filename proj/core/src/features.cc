// voxid/features.cc

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

#include "voxid/features.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "voxid/error.h"

namespace voxid::signal {

namespace {

constexpr double kPi = 3.14159265358979323846;

double HzToMel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double MelToHz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// mel energies for one frame of magnitudes
void MelEnergiesRow(const std::vector<double>& mag,
                    const std::vector<std::vector<double>>& fb,
                    std::vector<double>* energies) {
  const int num_filters = static_cast<int>(fb.size());
  energies->assign(num_filters, 0.0);
  for (int m = 0; m < num_filters; ++m) {
    double acc = 0.0;
    const auto& row = fb[m];
    for (size_t b = 0; b < row.size(); ++b) {
      const double p = mag[b] * mag[b];
      acc += row[b] * p;
    }
    (*energies)[m] = acc;
  }
}

}  // namespace

std::vector<std::vector<double>> MelFilterbank(int num_filters,
                                               const StftConfig& cfg,
                                               double f_lo, double f_hi) {
  const double nyquist = cfg.sample_rate / 2.0;
  if (num_filters <= 0)
    Throw(ErrorCode::kInvalidArgument, "MelFilterbank: num_filters must be > 0");
  if (!(0.0 <= f_lo && f_lo < f_hi && f_hi <= nyquist))
    Throw(ErrorCode::kInvalidArgument,
          "MelFilterbank: need 0 <= f_lo < f_hi <= nyquist, got [" +
              std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");

  const int bins = cfg.NumBins();
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;

  const double mel_lo = HzToMel(f_lo);
  const double mel_hi = HzToMel(f_hi);
  std::vector<double> edges(num_filters + 2);
  for (int i = 0; i < num_filters + 2; ++i)
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (num_filters + 1));

  std::vector<std::vector<double>> fb(num_filters,
                                      std::vector<double>(bins, 0.0));
  for (int m = 0; m < num_filters; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    int nonzero = 0;
    for (int b = 0; b < bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > lo && f < center)
        w = (f - lo) / (center - lo);
      else if (f >= center && f < hi)
        w = (hi - f) / (hi - center);
      fb[m][b] = w;
      if (w > 0.0) ++nonzero;
    }
    if (nonzero < 2)
      Throw(ErrorCode::kInvalidArgument,
            "MelFilterbank: filter " + std::to_string(m) +
                " spans fewer than 2 bins; reduce num_filters or widen the "
                "band");
  }
  return fb;
}

FeatureMatrix MfccFromMagnitude(const std::vector<std::vector<double>>& mag,
                                const StftConfig& cfg, int num_filters,
                                int num_coeffs) {
  if (num_coeffs > num_filters)
    Throw(ErrorCode::kInvalidArgument,
          "Mfcc: num_coeffs cannot exceed num_filters");
  const auto fb = MelFilterbank(num_filters, cfg, 0.0, cfg.sample_rate / 2.0);
  const int frames = static_cast<int>(mag.size());

  // orthonormal DCT-II basis, num_coeffs x num_filters
  std::vector<std::vector<double>> dct(num_coeffs,
                                       std::vector<double>(num_filters));
  for (int k = 0; k < num_coeffs; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / num_filters)
                                : std::sqrt(2.0 / num_filters);
    for (int m = 0; m < num_filters; ++m)
      dct[k][m] = scale * std::cos(kPi * (m + 0.5) * k / num_filters);
  }

  FeatureMatrix out;
  out.hop_seconds = cfg.HopSeconds();
  out.data.assign(frames, std::vector<double>(num_coeffs, 0.0));
  std::vector<double> energies;
  for (int f = 0; f < frames; ++f) {
    MelEnergiesRow(mag[f], fb, &energies);
    for (auto& e : energies) e = std::log(std::max(e, kLogFloor));
    for (int k = 0; k < num_coeffs; ++k) {
      double acc = 0.0;
      for (int m = 0; m < num_filters; ++m) acc += dct[k][m] * energies[m];
      out.data[f][k] = acc;
    }
  }
  return out;
}

FeatureMatrix Mfcc(const ComplexSpectrogram& spec, int num_filters,
                   int num_coeffs) {
  return MfccFromMagnitude(spec.magnitude, spec.config, num_filters,
                           num_coeffs);
}

FeatureMatrix LogMelEnergies(const ComplexSpectrogram& spec, int num_bands) {
  const auto fb = MelFilterbank(num_bands, spec.config, 0.0,
                                spec.config.sample_rate / 2.0);
  FeatureMatrix out;
  out.hop_seconds = spec.config.HopSeconds();
  const int frames = spec.NumFrames();
  out.data.assign(frames, std::vector<double>(num_bands, 0.0));
  std::vector<double> energies;
  for (int f = 0; f < frames; ++f) {
    MelEnergiesRow(spec.magnitude[f], fb, &energies);
    for (int m = 0; m < num_bands; ++m)
      out.data[f][m] = std::log(std::max(energies[m], kLogFloor));
  }
  return out;
}

FeatureMatrix AddDeltas(const FeatureMatrix& f) {
  const int frames = f.NumFrames();
  const int dims = f.Dims();
  if (frames < 1)
    Throw(ErrorCode::kInvalidArgument, "AddDeltas: need at least one frame");

  auto regress = [&](const std::vector<std::vector<double>>& src) {
    // d_t = sum_{n=1..2} n (c_{t+n} - c_{t-n}) / (2 sum n^2), replicate edges
    constexpr double kDenom = 2.0 * (1.0 + 4.0);
    std::vector<std::vector<double>> d(frames, std::vector<double>(dims, 0.0));
    auto clampf = [&](int t) { return std::min(frames - 1, std::max(0, t)); };
    for (int t = 0; t < frames; ++t)
      for (int j = 0; j < dims; ++j) {
        double acc = 0.0;
        for (int n = 1; n <= 2; ++n)
          acc += n * (src[clampf(t + n)][j] - src[clampf(t - n)][j]);
        d[t][j] = acc / kDenom;
      }
    return d;
  };

  const auto delta = regress(f.data);
  const auto accel = regress(delta);

  FeatureMatrix out;
  out.hop_seconds = f.hop_seconds;
  out.data.assign(frames, std::vector<double>(3 * dims));
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < dims; ++j) {
      out.data[t][j] = f.data[t][j];
      out.data[t][dims + j] = delta[t][j];
      out.data[t][2 * dims + j] = accel[t][j];
    }
  }
  return out;
}

std::string FeatureMatrixToJson(const FeatureMatrix& f) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"hop_seconds\":" << f.hop_seconds << ",\"frames\":" << f.NumFrames()
     << ",\"dims\":" << f.Dims() << ",\"data\":[";
  for (int t = 0; t < f.NumFrames(); ++t) {
    if (t) os << ",";
    os << "[";
    for (int j = 0; j < f.Dims(); ++j) {
      if (j) os << ",";
      os << f.data[t][j];
    }
    os << "]";
  }
  os << "]}";
  return os.str();
}

}  // namespace voxid::signal
