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

#include "mnemo/dialogue.h"

#include <set>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Subject, std::string_view>, 11> kSubjectNames = {{
    {Subject::kPersonalInterests, "personal interests"},
    {Subject::kFeelings, "feelings"},
    {Subject::kSkills, "skills"},
    {Subject::kTraits, "traits"},
    {Subject::kParticipatingEvents, "participating events"},
    {Subject::kEventsProgression, "events' progression"},
    {Subject::kSocialEvents, "social events"},
    {Subject::kOpinionDebates, "opinion debates"},
    {Subject::kHumorousJokes, "humorous jokes"},
    {Subject::kAudienceStories, "audience stories"},
    {Subject::kKnowledgeSharing, "knowledge sharing"},
}};

Error invalid(const std::string& what) {
  return Error(Errc::kInvalidDialogue, what);
}

// Rejects keys outside `allowed` so schema drift surfaces at load time.
void require_keys(const json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view record) {
  if (!j.is_object()) {
    throw Error(Errc::kParseError, std::string(record) + " must be an object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) {
      throw Error(Errc::kParseError, "unknown field '" + item.key() + "' in " +
                                         std::string(record));
    }
  }
}

}  // namespace

std::string_view to_string(Speaker s) {
  return s == Speaker::kUser ? "user" : "bot";
}

Speaker speaker_from_string(std::string_view s) {
  if (s == "user") return Speaker::kUser;
  if (s == "bot") return Speaker::kBot;
  throw Error(Errc::kParseError, "unknown speaker '" + std::string(s) + "'");
}

Utterance Utterance::user(std::string text) {
  return Utterance{Speaker::kUser, std::move(text), std::nullopt, std::nullopt};
}

Utterance Utterance::bot(std::string text) {
  return Utterance{Speaker::kBot, std::move(text), std::nullopt, std::nullopt};
}

std::string_view to_string(DialogueKind k) {
  return k == DialogueKind::kMemorable ? "memorable" : "general";
}

DialogueKind kind_from_string(std::string_view s) {
  if (s == "memorable") return DialogueKind::kMemorable;
  if (s == "general") return DialogueKind::kGeneral;
  throw Error(Errc::kParseError, "unknown dialogue kind '" + std::string(s) + "'");
}

std::string_view to_string(Subject s) {
  for (const auto& [subject, name] : kSubjectNames) {
    if (subject == s) return name;
  }
  return "unknown";
}

Subject subject_from_string(std::string_view s) {
  for (const auto& [subject, name] : kSubjectNames) {
    if (name == s) return subject;
  }
  throw Error(Errc::kParseError, "unknown subject '" + std::string(s) + "'");
}

DialogueKind kind_of(Subject s) {
  for (Subject m : kMemorableSubjects) {
    if (m == s) return DialogueKind::kMemorable;
  }
  return DialogueKind::kGeneral;
}

void validate(const Utterance& u) {
  if (text::is_blank(u.text)) throw invalid("utterance text is empty");
  if (u.speaker == Speaker::kUser && (u.thoughts || u.shift)) {
    throw invalid("user utterance carries thoughts or shift");
  }
}

void validate(const Dialogue& d) {
  if (d.id.empty()) throw invalid("dialogue id is empty");
  if (d.day_offset < 0) throw invalid(d.id + ": negative day_offset");
  if (kind_of(d.subject) != d.kind) {
    throw invalid(d.id + ": subject '" + std::string(to_string(d.subject)) +
                  "' is not " + std::string(to_string(d.kind)));
  }
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Speaker expected = i % 2 == 0 ? Speaker::kUser : Speaker::kBot;
    if (d.turns[i].speaker != expected) {
      throw invalid(d.id + ": turn " + std::to_string(i + 1) +
                    " breaks user/bot alternation");
    }
    validate(d.turns[i]);
  }
}

std::string render_transcript(const std::vector<Utterance>& turns) {
  std::string out;
  for (const auto& u : turns) {
    out += u.speaker == Speaker::kUser ? "User: " : "Bot: ";
    out += u.text;
    out += '\n';
  }
  return out;
}

const Dialogue* HistoryBundle::find(std::string_view id) const {
  for (const auto& d : dialogues) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const Dialogue& HistoryBundle::anchor() const {
  const Dialogue* d = find(anchor_id);
  if (d == nullptr) throw invalid("bundle anchor '" + anchor_id + "' missing");
  return *d;
}

void validate(const HistoryBundle& b) {
  std::set<std::string_view> ids;
  std::size_t anchors = 0;
  for (const auto& d : b.dialogues) {
    validate(d);
    if (!ids.insert(d.id).second) {
      throw Error(Errc::kDuplicateId, "duplicate id '" + d.id + "' in bundle");
    }
    if (d.id == b.anchor_id) {
      ++anchors;
      if (d.kind != DialogueKind::kMemorable) {
        throw invalid("bundle anchor '" + d.id + "' is not memorable");
      }
    }
  }
  if (anchors != 1) throw invalid("bundle must contain its anchor exactly once");
}

void to_json(json& j, const Utterance& u) {
  j = json{{"speaker", to_string(u.speaker)}, {"text", u.text}};
  if (u.thoughts) j["thoughts"] = *u.thoughts;
  if (u.shift) j["shift"] = *u.shift;
}

void from_json(const json& j, Utterance& u) {
  require_keys(j, {"speaker", "text", "thoughts", "shift"}, "turn");
  u.speaker = speaker_from_string(j.at("speaker").get<std::string>());
  u.text = j.at("text").get<std::string>();
  u.thoughts.reset();
  u.shift.reset();
  if (auto it = j.find("thoughts"); it != j.end() && !it->is_null()) {
    u.thoughts = it->get<std::string>();
  }
  if (auto it = j.find("shift"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw Error(Errc::kParseError, "shift must be boolean");
    u.shift = it->get<bool>();
  }
}

void to_json(json& j, const Dialogue& d) {
  j = json{{"id", d.id},
           {"kind", to_string(d.kind)},
           {"subject", to_string(d.subject)},
           {"topic", d.topic ? json(*d.topic) : json(nullptr)},
           {"day_offset", d.day_offset},
           {"turns", d.turns}};
}

void from_json(const json& j, Dialogue& d) {
  require_keys(j, {"id", "kind", "subject", "topic", "day_offset", "turns"},
               "dialogue");
  d.id = j.at("id").get<std::string>();
  d.kind = kind_from_string(j.at("kind").get<std::string>());
  d.subject = subject_from_string(j.at("subject").get<std::string>());
  const json& topic = j.at("topic");
  d.topic = topic.is_null() ? std::nullopt
                            : std::optional<std::string>(topic.get<std::string>());
  d.day_offset = j.at("day_offset").get<int>();
  d.turns = j.at("turns").get<std::vector<Utterance>>();
}

void to_json(json& j, const HistoryBundle& b) {
  j = json{{"anchor_id", b.anchor_id}, {"dialogues", b.dialogues}};
}

void from_json(const json& j, HistoryBundle& b) {
  require_keys(j, {"anchor_id", "dialogues"}, "bundle");
  b.anchor_id = j.at("anchor_id").get<std::string>();
  b.dialogues = j.at("dialogues").get<std::vector<Dialogue>>();
}

}  // namespace mnemo
