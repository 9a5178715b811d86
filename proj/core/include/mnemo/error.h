// Copyright 2026 The Mnemo Authors
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

#ifndef MNEMO_ERROR_H_
#define MNEMO_ERROR_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mnemo {

// Every failure the library reports is an mnemo::Error tagged with one of
// these codes. Callers branch on code(), never on message text.
enum class Errc {
  kDuplicateId,
  kInvalidDialogue,
  kParseError,
  kIoError,
  kInvalidRequest,
  kBackendUnavailable,
  kEmptyCompletion,
  kEmptyDialogue,
  kDimMismatch,
  kEmptyBatch,
  kNonFinite,
  kNoNegatives,
  kJudgeParseError,
  kMissingMemory,
  kMalformedTurn,
  kMaxTurnsExceeded,
  kSessionAborted,
  kPreconditionViolation,
  kTurnBoundViolation,
  kRangeError,
  kPoolExhausted,
  kEmptyTopic,
  kEmptySet,
  kShapeError,
  kNotFound,
  kConfigError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  // 1-based line number for parse failures of line-delimited files.
  std::optional<std::size_t> line() const noexcept { return line_; }
  // Identifier of the record the failure is attributed to, if any.
  const std::string& subject() const noexcept { return subject_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

  // Copy of this error attributed to `subject` (e.g. a dialogue id).
  Error attributed_to(std::string subject) const;

 private:
  Errc code_;
  std::optional<std::size_t> line_;
  std::string detail_;
  std::string subject_;
};

}  // namespace mnemo

#endif  // MNEMO_ERROR_H_
