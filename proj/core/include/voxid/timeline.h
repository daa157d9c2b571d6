// voxid/timeline.h

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

#ifndef VOXID_TIMELINE_H_
#define VOXID_TIMELINE_H_

#include <string>
#include <vector>

namespace voxid {

enum class SegmentLabel { kNonVocal = 0, kVocal = 1 };

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  SegmentLabel label = SegmentLabel::kNonVocal;
};

// Ordered, contiguous, non-overlapping intervals; adjacent intervals carry
// different labels.
struct SegmentTimeline {
  std::vector<Segment> segments;

  double TotalSeconds() const {
    return segments.empty() ? 0.0 : segments.back().end_s;
  }
  SegmentLabel LabelAt(double t) const;
  bool Valid() const;
};

std::string TimelineToJson(const SegmentTimeline& t, double hop_seconds);
SegmentTimeline TimelineFromJson(const std::string& json_text);

const char* LabelName(SegmentLabel label);
SegmentLabel LabelFromName(const std::string& name);

}  // namespace voxid

#endif  // VOXID_TIMELINE_H_
