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

#include "mnemo/error.h"

namespace mnemo {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kInvalidDialogue: return "InvalidDialogue";
    case Errc::kParseError: return "ParseError";
    case Errc::kIoError: return "IoError";
    case Errc::kInvalidRequest: return "InvalidRequest";
    case Errc::kBackendUnavailable: return "BackendUnavailable";
    case Errc::kEmptyCompletion: return "EmptyCompletion";
    case Errc::kEmptyDialogue: return "EmptyDialogue";
    case Errc::kDimMismatch: return "DimMismatch";
    case Errc::kEmptyBatch: return "EmptyBatch";
    case Errc::kNonFinite: return "NonFinite";
    case Errc::kNoNegatives: return "NoNegatives";
    case Errc::kJudgeParseError: return "JudgeParseError";
    case Errc::kMissingMemory: return "MissingMemory";
    case Errc::kMalformedTurn: return "MalformedTurn";
    case Errc::kMaxTurnsExceeded: return "MaxTurnsExceeded";
    case Errc::kSessionAborted: return "SessionAborted";
    case Errc::kPreconditionViolation: return "PreconditionViolation";
    case Errc::kTurnBoundViolation: return "TurnBoundViolation";
    case Errc::kRangeError: return "RangeError";
    case Errc::kPoolExhausted: return "PoolExhausted";
    case Errc::kEmptyTopic: return "EmptyTopic";
    case Errc::kEmptySet: return "EmptySet";
    case Errc::kShapeError: return "ShapeError";
    case Errc::kNotFound: return "NotFound";
    case Errc::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string format_message(Errc code, const std::string& message,
                           std::optional<std::size_t> line) {
  std::string out(errc_name(code));
  if (line) out += " (line " + std::to_string(*line) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, message, line)),
      code_(code),
      line_(line),
      detail_(message) {}

Error Error::attributed_to(std::string subject) const {
  Error copy(code_, subject + ": " + detail_, line_);
  copy.subject_ = std::move(subject);
  return copy;
}

}  // namespace mnemo
