//
// Copyright 2026 The lexsub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "lexsub/error.h"

#include <string>

namespace lexsub {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kOffsetMismatch:
      return "OffsetMismatch";
    case ErrorCode::kMissingFile:
      return "MissingFile";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kDuplicateInstance:
      return "DuplicateInstance";
    case ErrorCode::kBackendUnavailable:
      return "BackendUnavailable";
    case ErrorCode::kBackendMalformed:
      return "BackendMalformed";
    case ErrorCode::kMaskCountError:
      return "MaskCountError";
    case ErrorCode::kZeroTokens:
      return "ZeroTokens";
    case ErrorCode::kEmptyGuesses:
      return "EmptyGuesses";
    case ErrorCode::kTooManyGuesses:
      return "TooManyGuesses";
    case ErrorCode::kInsufficientRecords:
      return "InsufficientRecords";
    case ErrorCode::kUnknownQuestion:
      return "UnknownQuestion";
    case ErrorCode::kIndexOutOfRange:
      return "IndexOutOfRange";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

}  // namespace lexsub
