// voxid/features.h

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

#ifndef VOXID_FEATURES_H_
#define VOXID_FEATURES_H_

#include <string>
#include <vector>

#include "voxid/stft.h"

namespace voxid::signal {

// Per-frame acoustic features, frames x dims.
struct FeatureMatrix {
  std::vector<std::vector<double>> data;
  double hop_seconds = 0.010;

  int NumFrames() const { return static_cast<int>(data.size()); }
  int Dims() const { return data.empty() ? 0 : static_cast<int>(data[0].size()); }
};

// Triangular mel filterbank, num_filters x bins.  Centers are equally spaced
// on mel(f) = 2595 log10(1 + f/700); each triangle peaks at 1 before any
// normalization.  Errors out if any filter covers fewer than two bins.
std::vector<std::vector<double>> MelFilterbank(int num_filters,
                                               const StftConfig& cfg,
                                               double f_lo, double f_hi);

// 13 MFCCs per frame: power spectrum -> 26-band mel energies -> natural log
// with floor 1e-10 -> orthonormal DCT-II, coefficients 0..12 kept.
FeatureMatrix Mfcc(const ComplexSpectrogram& spec, int num_filters = 26,
                   int num_coeffs = 13);

// Same computation applied to a bare magnitude matrix ([frames][bins]) on
// the shared STFT grid; lets the classifier consume the separator's output
// spectrogram without resynthesis.
FeatureMatrix MfccFromMagnitude(const std::vector<std::vector<double>>& mag,
                                const StftConfig& cfg, int num_filters = 26,
                                int num_coeffs = 13);

// Appends delta and acceleration columns computed with the N=2 regression
// window and replicate edge padding; 13 -> 39 dims, column order
// [static | delta | accel].
FeatureMatrix AddDeltas(const FeatureMatrix& f);

// Log mel-band energies (natural log, floor 1e-10), frames x num_bands.
// The segmentation front end appends a 7-band version of this to its MFCCs.
FeatureMatrix LogMelEnergies(const ComplexSpectrogram& spec, int num_bands);

// Row-major JSON export used by the CLI for debugging.
std::string FeatureMatrixToJson(const FeatureMatrix& f);

constexpr double kLogFloor = 1e-10;

}  // namespace voxid::signal

#endif  // VOXID_FEATURES_H_
