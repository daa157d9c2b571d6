// voxid/timeline.cc

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

#include "voxid/timeline.h"

#include <json.hpp>

#include "voxid/error.h"

namespace voxid {

SegmentLabel SegmentTimeline::LabelAt(double t) const {
  for (const auto& s : segments)
    if (t >= s.start_s && t < s.end_s) return s.label;
  return segments.empty() ? SegmentLabel::kNonVocal : segments.back().label;
}

bool SegmentTimeline::Valid() const {
  double prev_end = 0.0;
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.start_s < s.end_s)) return false;
    if (i == 0) {
      prev_end = s.end_s;
      continue;
    }
    if (s.start_s != prev_end) return false;
    if (s.label == segments[i - 1].label) return false;
    prev_end = s.end_s;
  }
  return true;
}

const char* LabelName(SegmentLabel label) {
  return label == SegmentLabel::kVocal ? "vocal" : "non_vocal";
}

SegmentLabel LabelFromName(const std::string& name) {
  if (name == "vocal") return SegmentLabel::kVocal;
  if (name == "non_vocal") return SegmentLabel::kNonVocal;
  Throw(ErrorCode::kInvalidArgument, "unknown segment label: " + name);
}

std::string TimelineToJson(const SegmentTimeline& t, double hop_seconds) {
  nlohmann::json j;
  j["hop_seconds"] = hop_seconds;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : t.segments)
    j["segments"].push_back({{"start", s.start_s},
                             {"end", s.end_s},
                             {"label", LabelName(s.label)}});
  return j.dump();
}

SegmentTimeline TimelineFromJson(const std::string& json_text) {
  SegmentTimeline out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    Throw(ErrorCode::kIoFailure,
          std::string("timeline JSON parse error: ") + e.what());
  }
  for (const auto& s : j.at("segments")) {
    Segment seg;
    seg.start_s = s.at("start").get<double>();
    seg.end_s = s.at("end").get<double>();
    seg.label = LabelFromName(s.at("label").get<std::string>());
    out.segments.push_back(seg);
  }
  return out;
}

}  // namespace voxid
