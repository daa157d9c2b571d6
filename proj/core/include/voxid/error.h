// voxid/error.h

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

#ifndef VOXID_ERROR_H_
#define VOXID_ERROR_H_

#include <stdexcept>
#include <string>

namespace voxid {

enum class ErrorCode {
  kInvalidArgument,    // bad parameter or precondition violation
  kUnsupportedCodec,   // WAV codec other than PCM16 / float32
  kTruncatedFile,      // file shorter than its headers claim
  kEmptyAudio,         // zero-length audio payload
  kIoFailure,          // filesystem or parse failure
  kShapeMismatch,      // tensor/matrix shape disagreement
  kNonFinite,          // NaN or Inf where finite values are required
  kChecksumMismatch,   // weights.bin does not match its recorded CRC32
  kBadBundle,          // malformed or version-incompatible model bundle
  kNoVocalContent,     // pipeline found no vocal segments to classify
  kBundleLocked,       // another writer holds the bundle lock
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Throw(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace voxid

#endif  // VOXID_ERROR_H_
