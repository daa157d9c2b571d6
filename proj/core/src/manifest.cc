// voxid/manifest.cc

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

#include "voxid/manifest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "voxid/error.h"

namespace voxid {

namespace {

using nlohmann::json;

std::string ResolvePath(const std::string& manifest_path,
                        const std::string& entry) {
  std::filesystem::path p(entry);
  if (p.is_absolute()) return entry;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

// Invokes fn(line_json, line_number) for every non-empty line.
template <typename Fn>
void ForEachLine(const std::string& path, Fn fn) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIoFailure, "cannot open manifest: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      Throw(ErrorCode::kIoFailure, path + " line " +
                                       std::to_string(lineno) +
                                       ": not valid JSON");
    }
    fn(j, lineno);
  }
}

std::string RequireString(const json& j, const char* key,
                          const std::string& path, int lineno) {
  if (!j.contains(key) || !j[key].is_string()) {
    Throw(ErrorCode::kIoFailure, path + " line " + std::to_string(lineno) +
                                     ": missing string field \"" + key +
                                     "\"");
  }
  return j[key].get<std::string>();
}

std::ofstream OpenForWrite(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) Throw(ErrorCode::kIoFailure, "cannot write manifest: " + path);
  return out;
}

}  // namespace

std::vector<SegmentationItem> ReadSegmentationManifest(
    const std::string& path) {
  std::vector<SegmentationItem> items;
  ForEachLine(path, [&](const json& j, int lineno) {
    SegmentationItem item;
    item.path = ResolvePath(path, RequireString(j, "path", path, lineno));
    if (!j.contains("segments")) {
      Throw(ErrorCode::kIoFailure, path + " line " + std::to_string(lineno) +
                                       ": missing \"segments\"");
    }
    json wrapper;
    wrapper["segments"] = j["segments"];
    item.timeline = TimelineFromJson(wrapper.dump());
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<PairItem> ReadPairManifest(const std::string& path) {
  std::vector<PairItem> items;
  ForEachLine(path, [&](const json& j, int lineno) {
    PairItem item;
    item.mixture =
        ResolvePath(path, RequireString(j, "mixture", path, lineno));
    item.vocal = ResolvePath(path, RequireString(j, "vocal", path, lineno));
    items.push_back(std::move(item));
  });
  return items;
}

std::vector<ClassificationItem> ReadClassificationManifest(
    const std::string& path) {
  std::vector<ClassificationItem> items;
  ForEachLine(path, [&](const json& j, int lineno) {
    ClassificationItem item;
    item.path = ResolvePath(path, RequireString(j, "path", path, lineno));
    item.singer = RequireString(j, "singer", path, lineno);
    items.push_back(std::move(item));
  });
  return items;
}

void WriteSegmentationManifest(const std::string& path,
                               const std::vector<SegmentationItem>& items) {
  std::ofstream out = OpenForWrite(path);
  for (const auto& item : items) {
    json segments = json::array();
    for (const auto& s : item.timeline.segments) {
      segments.push_back({{"start", s.start_s},
                          {"end", s.end_s},
                          {"label", LabelName(s.label)}});
    }
    json line;
    line["path"] = item.path;
    line["segments"] = segments;
    out << line.dump() << "\n";
  }
}

void WritePairManifest(const std::string& path,
                       const std::vector<PairItem>& items) {
  std::ofstream out = OpenForWrite(path);
  for (const auto& item : items) {
    json line;
    line["mixture"] = item.mixture;
    line["vocal"] = item.vocal;
    out << line.dump() << "\n";
  }
}

void WriteClassificationManifest(
    const std::string& path, const std::vector<ClassificationItem>& items) {
  std::ofstream out = OpenForWrite(path);
  for (const auto& item : items) {
    json line;
    line["path"] = item.path;
    line["singer"] = item.singer;
    out << line.dump() << "\n";
  }
}

}  // namespace voxid
