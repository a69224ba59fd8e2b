// include/npc/error.h

// Copyright 2026  The NPC Embed Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NPC_ERROR_H_
#define NPC_ERROR_H_

#include <stdexcept>
#include <string>

namespace npc {

enum class ErrorCode {
  kNotFound,
  kUnsupportedFormat,
  kCorruptFile,
  kTooShort,
  kStreamTooShort,
  kNoOtherStream,
  kInsufficientSpeakers,
  kInsufficientUtterances,
  kMissingFeatures,
  kOutOfRange,
  kShapeMismatch,
  kOddExtent,
  kDegenerateBatch,
  kNonFiniteValue,
  kNonFiniteGradient,
  kNonFiniteLoss,
  kEmptyData,
  kWrongLossKind,
  kIoError,
  kVersionMismatch,
  kChecksumMismatch,
  kZeroNormEmbedding,
  kZeroNormVector,
  kTooFewFrames,
  kEmptyEnrollment,
  kDimensionMismatch,
  kDegenerateTrials,
  kInvalidArgument,
};

// All recoverable failures in the library throw this type.  The CLI maps it
// to a message on stderr and a nonzero exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

const char* ErrorCodeName(ErrorCode code);

}  // namespace npc

#endif  // NPC_ERROR_H_
