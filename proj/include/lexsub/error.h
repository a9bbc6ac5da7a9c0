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

#ifndef LEXSUB_ERROR_H_
#define LEXSUB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexsub {

enum class ErrorCode {
  kInvalidArgument,
  kOffsetMismatch,
  kMissingFile,
  kParseError,
  kDuplicateInstance,
  kBackendUnavailable,
  kBackendMalformed,
  kMaskCountError,
  kZeroTokens,
  kEmptyGuesses,
  kTooManyGuesses,
  kInsufficientRecords,
  kUnknownQuestion,
  kIndexOutOfRange,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library is an Error carrying one of the
// codes above; what() is prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lexsub

#endif  // LEXSUB_ERROR_H_
