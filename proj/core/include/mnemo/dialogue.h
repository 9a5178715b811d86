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

#ifndef MNEMO_DIALOGUE_H_
#define MNEMO_DIALOGUE_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mnemo {

enum class Speaker { kUser, kBot };

std::string_view to_string(Speaker s);
Speaker speaker_from_string(std::string_view s);

struct Utterance {
  Speaker speaker = Speaker::kUser;
  std::string text;
  // Bot turns only: the reasoning behind the shift decision, and the decision.
  std::optional<std::string> thoughts;
  std::optional<bool> shift;

  static Utterance user(std::string text);
  static Utterance bot(std::string text);

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class DialogueKind { kMemorable, kGeneral };

std::string_view to_string(DialogueKind k);
DialogueKind kind_from_string(std::string_view s);

// The eleven dialogue subjects. The first six are memorable: they concern
// the user's own life and are what later sessions may steer back to.
enum class Subject {
  kPersonalInterests,
  kFeelings,
  kSkills,
  kTraits,
  kParticipatingEvents,
  kEventsProgression,
  kSocialEvents,
  kOpinionDebates,
  kHumorousJokes,
  kAudienceStories,
  kKnowledgeSharing,
};

inline constexpr std::array<Subject, 6> kMemorableSubjects = {
    Subject::kPersonalInterests, Subject::kFeelings,
    Subject::kSkills,            Subject::kTraits,
    Subject::kParticipatingEvents, Subject::kEventsProgression};

inline constexpr std::array<Subject, 5> kGeneralSubjects = {
    Subject::kSocialEvents, Subject::kOpinionDebates, Subject::kHumorousJokes,
    Subject::kAudienceStories, Subject::kKnowledgeSharing};

std::string_view to_string(Subject s);
Subject subject_from_string(std::string_view s);
DialogueKind kind_of(Subject s);

struct Dialogue {
  std::string id;
  DialogueKind kind = DialogueKind::kGeneral;
  Subject subject = Subject::kSocialEvents;
  std::optional<std::string> topic;
  std::vector<Utterance> turns;
  // Days before "now"; 0 is today.
  int day_offset = 0;

  // Number of user/bot exchanges, counting a trailing unanswered user turn.
  std::size_t turn_pairs() const { return (turns.size() + 1) / 2; }

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// Throws Errc::kInvalidDialogue describing the first violated invariant.
void validate(const Utterance& u);
void validate(const Dialogue& d);

// Speaker-tagged transcript, one "User: ..." / "Bot: ..." line per turn.
std::string render_transcript(const std::vector<Utterance>& turns);

struct HistoryBundle {
  std::vector<Dialogue> dialogues;
  std::string anchor_id;

  const Dialogue* find(std::string_view id) const;
  const Dialogue& anchor() const;

  friend bool operator==(const HistoryBundle&, const HistoryBundle&) = default;
};

// Exactly one dialogue carries anchor_id, and it is memorable.
void validate(const HistoryBundle& b);

void to_json(nlohmann::json& j, const Utterance& u);
void from_json(const nlohmann::json& j, Utterance& u);
void to_json(nlohmann::json& j, const Dialogue& d);
void from_json(const nlohmann::json& j, Dialogue& d);
void to_json(nlohmann::json& j, const HistoryBundle& b);
void from_json(const nlohmann::json& j, HistoryBundle& b);

}  // namespace mnemo

#endif  // MNEMO_DIALOGUE_H_
