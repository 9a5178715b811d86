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

#ifndef MNEMO_SHIFT_ENGINE_H_
#define MNEMO_SHIFT_ENGINE_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"
#include "mnemo/ranker.h"
#include "mnemo/summarizer.h"

namespace mnemo {

enum class RetrievalPolicy { kPerSession, kPerUtterance };

std::string_view to_string(RetrievalPolicy p);
RetrievalPolicy policy_from_string(std::string_view s);

inline constexpr int kDefaultMaxTurns = 10;

// One bot turn: reasoning, the Yes/No shift decision, and the reply.
struct TurnDecision {
  std::string thoughts;
  bool shift = false;
  std::string response;

  friend bool operator==(const TurnDecision&, const TurnDecision&) = default;
};

// Wire format, exactly three labelled lines:
//   Thoughts: <text>
//   Shift: Yes|No
//   Response: <text>
// The Shift token is matched case-insensitively with surrounding
// punctuation ignored. Throws kMalformedTurn.
TurnDecision parse_turn_output(std::string_view raw);
std::string format_turn_output(const TurnDecision& decision);

struct SessionState {
  HistoryBundle bundle;
  std::vector<TopicEntry> topics;
  ContextWindow context;
  // Top candidate (t_r) and the full ranking it came from.
  std::optional<RankedCandidate> retrieved;
  std::vector<RankedCandidate> ranking;
  RetrievalPolicy policy = RetrievalPolicy::kPerSession;
  std::vector<Utterance> transcript;
  // Bot turns taken so far.
  int turn_counter = 0;
  // 1-based bot turn of the first shift, if any.
  std::optional<int> shift_turn;
  int max_turns = kDefaultMaxTurns;
  int rank_calls = 0;

  const TopicEntry* retrieved_topic() const;

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

void to_json(nlohmann::json& j, const TurnDecision& d);
void to_json(nlohmann::json& j, const SessionState& s);

// Shift-generation request: system contract, the remembered dialogue with
// its topic, then the current transcript ending on the latest user turn.
GenerationRequest compose_shift_request(const Dialogue& memory,
                                        const TopicEntry& topic,
                                        std::span<const Utterance> transcript);

// compose_shift_request for the session's current transcript. Throws
// kMissingMemory if `topic` does not name a dialogue of the bundle.
GenerationRequest compose_shift_prompt(const SessionState& state,
                                       const Dialogue* memory,
                                       const TopicEntry& topic);

// Follow-up appended after a reply that failed to parse.
extern const std::string_view kTurnRepairInstruction;

// Request for the next user-side utterance. `persona`, if given, lists the
// topics the simulated user has talked about before.
GenerationRequest user_turn_request(const HistoryBundle* persona,
                                    std::span<const Utterance> transcript);
// Strips a leading "User:" label and surrounding whitespace.
std::string clean_user_utterance(std::string_view raw);

// Generates one decision for `request`, retrying with the repair instruction
// up to `repair_attempts` times. Throws kMalformedTurn when all fail.
TurnDecision generate_turn(Backend& backend, GenerationRequest request,
                           int repair_attempts);

// Supplies user utterances to run_session.
class UserSource {
 public:
  virtual ~UserSource() = default;
  // nullopt when the source has nothing more to say.
  virtual std::optional<std::string> next_user_utterance(const SessionState& state) = 0;
};

class ScriptedUser : public UserSource {
 public:
  explicit ScriptedUser(std::vector<std::string> lines) : lines_(std::move(lines)) {}
  std::optional<std::string> next_user_utterance(const SessionState&) override;

 private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

struct SessionOutcome {
  std::vector<Utterance> transcript;
  std::optional<int> shift_turn;
  std::optional<TopicEntry> retrieved_topic;
  int turns = 0;

  friend bool operator==(const SessionOutcome&, const SessionOutcome&) = default;
};

void to_json(nlohmann::json& j, const SessionOutcome& o);

struct EngineOptions {
  int repair_attempts = 2;
  // Keep talking after a successful shift until max_turns.
  bool run_to_cap = false;
  double temperature = kDialogueTemperature;
  int max_tokens = 512;
};

// The per-turn proactive policy. Holds references to a ranker model and a
// backend, both shared read-only; SessionState values are owned by callers.
class ShiftEngine {
 public:
  ShiftEngine(const RankerModel& model, Backend& backend, EngineOptions options = {});

  // Summarizes the bundle and seeds the transcript with `opening` (which
  // must alternate user/bot starting with user). If the opening ends on a
  // user turn the initial retrieval runs immediately.
  SessionState open(HistoryBundle bundle, std::vector<Utterance> opening,
                    RetrievalPolicy policy, int max_turns = kDefaultMaxTurns);

  // Bot turn answering the pending user utterance at the end of the
  // transcript. Throws kMaxTurnsExceeded, kPreconditionViolation,
  // kMissingMemory, kMalformedTurn.
  TurnDecision respond(SessionState& state);

  // Appends `user_text`, re-ranks under the per-utterance policy (or when no
  // retrieval has happened yet), then responds.
  TurnDecision advance(SessionState& state, std::string_view user_text);

  // Value-semantics form of advance(); `state` is left untouched on error.
  std::pair<TurnDecision, SessionState> step(SessionState state,
                                             std::string_view user_text);

  // Whole session: open, answer the opening's last utterance if it is the
  // user's, then alternate with `user_source` until the first shift (or
  // max_turns with run_to_cap). Throws kSessionAborted when the user source
  // runs dry.
  SessionOutcome run_session(HistoryBundle bundle, std::vector<Utterance> opening,
                             UserSource& user_source, RetrievalPolicy policy,
                             int max_turns = kDefaultMaxTurns);

  // Whether a session in `state` is finished under this engine's options.
  bool finished(const SessionState& state) const;

  const EngineOptions& options() const { return options_; }

 private:
  void retrieve(SessionState& state);

  const RankerModel& model_;
  Backend& backend_;
  EngineOptions options_;
  Summarizer summarizer_;
};

}  // namespace mnemo

#endif  // MNEMO_SHIFT_ENGINE_H_
