// voxid/manifest.h

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

#ifndef VOXID_MANIFEST_H_
#define VOXID_MANIFEST_H_

#include <string>
#include <vector>

#include "voxid/timeline.h"

namespace voxid {

// JSON-lines manifests tie audio files to their supervision.  Relative
// paths are resolved against the manifest file's directory on read, so a
// dataset directory can be moved as a unit.

// {"path": wav, "segments": [{"start","end","label"}...]}
struct SegmentationItem {
  std::string path;
  SegmentTimeline timeline;
};

// {"mixture": wav, "vocal": wav}
struct PairItem {
  std::string mixture;
  std::string vocal;
};

// {"path": wav, "singer": name}
struct ClassificationItem {
  std::string path;
  std::string singer;
};

std::vector<SegmentationItem> ReadSegmentationManifest(
    const std::string& path);
std::vector<PairItem> ReadPairManifest(const std::string& path);
std::vector<ClassificationItem> ReadClassificationManifest(
    const std::string& path);

void WriteSegmentationManifest(const std::string& path,
                               const std::vector<SegmentationItem>& items);
void WritePairManifest(const std::string& path,
                       const std::vector<PairItem>& items);
void WriteClassificationManifest(
    const std::string& path, const std::vector<ClassificationItem>& items);

}  // namespace voxid

#endif  // VOXID_MANIFEST_H_
