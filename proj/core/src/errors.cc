// Copyright 2026 The PMA-URL Authors.
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

#include "pma/errors.h"

namespace pma {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kNotScalarLoss: return "NotScalarLoss";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIdOutOfRange: return "IdOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kVocabTooSmall: return "VocabTooSmall";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kEmptySpan: return "EmptySpan";
    case ErrorCode::kInvalidLevel: return "InvalidLevel";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kDataEmpty: return "DataEmpty";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kFractionOverflow: return "FractionOverflow";
    case ErrorCode::kNoHost: return "NoHost";
    case ErrorCode::kUnsplittable: return "Unsplittable";
    case ErrorCode::kNoBoundaries: return "NoBoundaries";
    case ErrorCode::kInsufficientSource: return "InsufficientSource";
    case ErrorCode::kBadCheckpoint: return "BadCheckpoint";
    case ErrorCode::kBadVocab: return "BadVocab";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

bool IsNumericError(ErrorCode code) {
  return code == ErrorCode::kNonFiniteValue ||
         code == ErrorCode::kDivergenceDetected;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace pma
