// Copyright 2026 contactcal contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ccal {

enum class ErrorCode {
  kIo,
  kParse,
  kInvalidArgument,
  kDimensionMismatch,
  kEmptyCloud,
  kTargetTooLarge,
  kNonFiniteValue,
  kGimbalLock,
  kNoCorrespondences,
  kInsufficientCorrespondences,
  kDegenerateNormalEquations,
  kDegenerateProblem,
  kNoActivePairs,
  kAsymmetricInput,
  kIkFailure,
  kNonDecreasingCost,
  kUnknownPreset,
  kEmptySelection,
  kInternal,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kTargetTooLarge: return "TargetTooLarge";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kGimbalLock: return "GimbalLock";
    case ErrorCode::kNoCorrespondences: return "NoCorrespondences";
    case ErrorCode::kInsufficientCorrespondences:
      return "InsufficientCorrespondences";
    case ErrorCode::kDegenerateNormalEquations:
      return "DegenerateNormalEquations";
    case ErrorCode::kDegenerateProblem: return "DegenerateProblem";
    case ErrorCode::kNoActivePairs: return "NoActivePairs";
    case ErrorCode::kAsymmetricInput: return "AsymmetricInput";
    case ErrorCode::kIkFailure: return "IkFailure";
    case ErrorCode::kNonDecreasingCost: return "NonDecreasingCost";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "UnknownError";
}

/// Exception carrying a machine-readable code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccal
