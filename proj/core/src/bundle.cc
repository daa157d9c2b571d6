// voxid/bundle.cc

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

#include "voxid/bundle.h"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "voxid/error.h"

namespace voxid::nn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void PutF64Le(double v, uint8_t* out) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(bits >> (8 * i));
}

double GetF64Le(const uint8_t* in) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(in[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

uint32_t Crc32Of(const std::vector<uint8_t>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // crc32 takes uInt chunks; feed in bounded pieces for very large buffers.
  size_t off = 0;
  while (off < bytes.size()) {
    const size_t chunk = std::min<size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(chunk));
    off += chunk;
  }
  return static_cast<uint32_t>(crc);
}

std::vector<uint8_t> ReadAllBytes(const fs::path& path, const char* what) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    Throw(ErrorCode::kIoFailure,
          std::string("cannot open ") + what + ": " + path.string());
  }
  f.seekg(0, std::ios::end);
  const std::streamoff size = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) f.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!f) {
    Throw(ErrorCode::kIoFailure,
          std::string("cannot read ") + what + ": " + path.string());
  }
  return bytes;
}

// Advisory writer lock; released on destruction.
class BundleLock {
 public:
  explicit BundleLock(const fs::path& dir) : path_(dir / ".lock") {
    const int fd =
        ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      Throw(ErrorCode::kBundleLocked,
            "bundle is locked by another writer: " + path_.string());
    }
    ::close(fd);
  }
  ~BundleLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

}  // namespace

void SaveBundle(const std::string& dir, const BundleInfo& info,
                const ParameterSet& params) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) {
    Throw(ErrorCode::kIoFailure,
          "cannot create bundle directory " + root.string() + ": " +
              ec.message());
  }
  BundleLock lock(root);

  std::vector<uint8_t> weights(
      static_cast<size_t>(params.TotalElements()) * 8);
  json manifest = json::array();
  int64_t offset = 0;
  for (int i = 0; i < params.size(); ++i) {
    const Parameter& p = params.at(i);
    json entry;
    entry["name"] = p.name;
    entry["shape"] = p.value.shape();
    entry["offset"] = offset;
    manifest.push_back(std::move(entry));
    for (int64_t j = 0; j < p.value.numel(); ++j) {
      PutF64Le(p.value[j], weights.data() + offset);
      offset += 8;
    }
  }

  {
    std::ofstream f(root / "weights.bin", std::ios::binary);
    if (!f) {
      Throw(ErrorCode::kIoFailure,
            "cannot write " + (root / "weights.bin").string());
    }
    f.write(reinterpret_cast<const char*>(weights.data()),
            static_cast<std::streamsize>(weights.size()));
    if (!f) {
      Throw(ErrorCode::kIoFailure,
            "cannot write " + (root / "weights.bin").string());
    }
  }

  json arch;
  arch["format_version"] = kBundleFormatVersion;
  arch["architecture"] = info.architecture;
  arch["hyperparameters"] = info.hyperparameters;
  arch["params"] = std::move(manifest);
  arch["weights_bytes"] = offset;
  arch["weights_crc32"] = Crc32Of(weights);
  {
    std::ofstream f(root / "arch.json");
    if (!f) {
      Throw(ErrorCode::kIoFailure,
            "cannot write " + (root / "arch.json").string());
    }
    f << arch.dump(2) << "\n";
  }

  if (!info.meta.is_null()) {
    std::ofstream f(root / "meta.json");
    if (!f) {
      Throw(ErrorCode::kIoFailure,
            "cannot write " + (root / "meta.json").string());
    }
    f << info.meta.dump(2) << "\n";
  }
}

namespace {

json ParseArch(const fs::path& root) {
  const auto bytes = ReadAllBytes(root / "arch.json", "arch.json");
  json arch = json::parse(bytes.begin(), bytes.end(), nullptr,
                          /*allow_exceptions=*/false);
  if (arch.is_discarded()) {
    Throw(ErrorCode::kBadBundle,
          "arch.json is not valid JSON: " + (root / "arch.json").string());
  }
  if (!arch.contains("format_version") ||
      !arch["format_version"].is_number_integer()) {
    Throw(ErrorCode::kBadBundle, "arch.json is missing format_version");
  }
  const int version = arch["format_version"].get<int>();
  if (version != kBundleFormatVersion) {
    Throw(ErrorCode::kBadBundle,
          "unknown bundle format version " + std::to_string(version) +
              " (expected " + std::to_string(kBundleFormatVersion) + ")");
  }
  for (const char* key : {"architecture", "hyperparameters", "params",
                          "weights_bytes", "weights_crc32"}) {
    if (!arch.contains(key)) {
      Throw(ErrorCode::kBadBundle,
            std::string("arch.json is missing field: ") + key);
    }
  }
  if (!arch["params"].is_array()) {
    Throw(ErrorCode::kBadBundle, "arch.json params field must be an array");
  }
  return arch;
}

json ReadMeta(const fs::path& root) {
  if (!fs::exists(root / "meta.json")) return json();
  const auto bytes = ReadAllBytes(root / "meta.json", "meta.json");
  json meta = json::parse(bytes.begin(), bytes.end(), nullptr,
                          /*allow_exceptions=*/false);
  if (meta.is_discarded()) {
    Throw(ErrorCode::kBadBundle,
          "meta.json is not valid JSON: " + (root / "meta.json").string());
  }
  return meta;
}

struct ManifestEntry {
  std::string name;
  Shape shape;
  int64_t offset = 0;
  int64_t bytes = 0;
};

std::vector<ManifestEntry> ValidateManifest(const json& arch) {
  const int64_t total = arch["weights_bytes"].get<int64_t>();
  std::vector<ManifestEntry> entries;
  for (const auto& e : arch["params"]) {
    if (!e.contains("name") || !e.contains("shape") || !e.contains("offset")) {
      Throw(ErrorCode::kBadBundle,
            "arch.json params entry missing name/shape/offset");
    }
    ManifestEntry m;
    m.name = e["name"].get<std::string>();
    m.shape = e["shape"].get<Shape>();
    m.offset = e["offset"].get<int64_t>();
    for (int d : m.shape) {
      if (d <= 0) {
        Throw(ErrorCode::kShapeMismatch,
              "parameter " + m.name + ": invalid shape " +
                  ShapeToString(m.shape));
      }
    }
    m.bytes = ShapeNumel(m.shape) * 8;
    entries.push_back(std::move(m));
  }
  // Each entry must occupy exactly the extent between its offset and the
  // next one; an edited shape breaks this for the edited parameter.
  int64_t expect = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    const ManifestEntry& m = entries[i];
    if (m.offset != expect) {
      Throw(ErrorCode::kBadBundle,
            "parameter " + m.name + ": offset " + std::to_string(m.offset) +
                " does not follow the previous parameter (expected " +
                std::to_string(expect) + ")");
    }
    const int64_t end =
        (i + 1 < entries.size()) ? entries[i + 1].offset : total;
    if (end - m.offset != m.bytes) {
      Throw(ErrorCode::kShapeMismatch,
            "parameter " + m.name + ": shape " + ShapeToString(m.shape) +
                " needs " + std::to_string(m.bytes) + " bytes but " +
                std::to_string(end - m.offset) + " are recorded");
    }
    expect = m.offset + m.bytes;
  }
  if (entries.empty() && total != 0) {
    Throw(ErrorCode::kBadBundle, "weights_bytes nonzero with empty manifest");
  }
  return entries;
}

}  // namespace

BundleInfo LoadBundle(const std::string& dir, ParameterSet& params) {
  const fs::path root(dir);
  json arch = ParseArch(root);
  std::vector<ManifestEntry> entries = ValidateManifest(arch);
  const int64_t total = arch["weights_bytes"].get<int64_t>();

  const auto weights = ReadAllBytes(root / "weights.bin", "weights.bin");
  if (static_cast<int64_t>(weights.size()) != total) {
    Throw(ErrorCode::kTruncatedFile,
          "weights.bin: expected " + std::to_string(total) +
              " bytes, found " + std::to_string(weights.size()));
  }
  const uint32_t crc = Crc32Of(weights);
  const uint32_t recorded = arch["weights_crc32"].get<uint32_t>();
  if (crc != recorded) {
    Throw(ErrorCode::kChecksumMismatch,
          "weights.bin checksum " + std::to_string(crc) +
              " does not match recorded " + std::to_string(recorded));
  }

  for (const ManifestEntry& m : entries) {
    Tensor t(m.shape);
    const uint8_t* src = weights.data() + m.offset;
    for (int64_t j = 0; j < t.numel(); ++j) t[j] = GetF64Le(src + j * 8);
    params.Create(m.name, std::move(t));
  }

  BundleInfo info;
  info.architecture = arch["architecture"].get<std::string>();
  info.hyperparameters = arch["hyperparameters"];
  info.meta = ReadMeta(root);
  return info;
}

BundleInfo PeekBundle(const std::string& dir) {
  const fs::path root(dir);
  json arch = ParseArch(root);
  BundleInfo info;
  info.architecture = arch["architecture"].get<std::string>();
  info.hyperparameters = arch["hyperparameters"];
  info.meta = ReadMeta(root);
  return info;
}

}  // namespace voxid::nn
