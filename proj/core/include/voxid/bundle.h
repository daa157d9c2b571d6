// voxid/bundle.h

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

#ifndef VOXID_BUNDLE_H_
#define VOXID_BUNDLE_H_

#include <string>

#include "json.hpp"
#include "voxid/params.h"

namespace voxid::nn {

// Model bundle directory layout:
//   arch.json   - format_version, architecture id, hyperparameters, ordered
//                 parameter manifest (name/shape/byte offset), total byte
//                 count and CRC32 of weights.bin
//   weights.bin - all tensors concatenated in manifest order, row-major,
//                 little-endian IEEE-754 float64
//   meta.json   - optional free-form metadata (e.g. the classifier LabelMap)
//
// Writers hold an advisory .lock file inside the directory for the duration
// of the write; a second writer fails instead of corrupting the bundle.
struct BundleInfo {
  std::string architecture;
  nlohmann::json hyperparameters = nlohmann::json::object();
  nlohmann::json meta;  // null -> no meta.json
};

inline constexpr int kBundleFormatVersion = 1;

void SaveBundle(const std::string& dir, const BundleInfo& info,
                const ParameterSet& params);

// Rebuilds the parameter set (gradients and moments zeroed) after
// validating the manifest, the byte count, and the checksum.
BundleInfo LoadBundle(const std::string& dir, ParameterSet& params);

// Reads only arch.json and meta.json; no weights validation.
BundleInfo PeekBundle(const std::string& dir);

}  // namespace voxid::nn

#endif  // VOXID_BUNDLE_H_
