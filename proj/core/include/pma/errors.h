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

#ifndef PMA_ERRORS_H_
#define PMA_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pma {

// Every failure raised by the library carries one of these codes. The CLI maps
// numeric codes to exit status 3 and everything else to 2.
enum class ErrorCode {
  kShapeMismatch,
  kNonFiniteValue,
  kNotScalarLoss,
  kInvalidArgument,
  kIdOutOfRange,
  kEmptyInput,
  kEmptyCorpus,
  kVocabTooSmall,
  kUnknownId,
  kEmptySpan,
  kInvalidLevel,
  kLabelOutOfRange,
  kDataEmpty,
  kDivergenceDetected,
  kMissingColumn,
  kUnknownLabel,
  kEmptyFile,
  kFractionOverflow,
  kNoHost,
  kUnsplittable,
  kNoBoundaries,
  kInsufficientSource,
  kBadCheckpoint,
  kBadVocab,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// True for failures caused by numerics rather than by inputs.
bool IsNumericError(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pma

#endif  // PMA_ERRORS_H_
