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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "scripted_backend.h"

namespace mnemo {
namespace {

using testing::make_bundle;
using testing::make_dialogue;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mnemo::Error thrown";
  return Errc::kNotFound;
}

TEST(Dialogue, SubjectsPartitionIntoMemorableAndGeneral) {
  for (Subject s : kMemorableSubjects) EXPECT_EQ(kind_of(s), DialogueKind::kMemorable);
  for (Subject s : kGeneralSubjects) EXPECT_EQ(kind_of(s), DialogueKind::kGeneral);
  for (Subject s : kMemorableSubjects) EXPECT_EQ(subject_from_string(to_string(s)), s);
  for (Subject s : kGeneralSubjects) EXPECT_EQ(subject_from_string(to_string(s)), s);
  EXPECT_EQ(to_string(Subject::kEventsProgression), "events' progression");
}

TEST(Dialogue, ValidateChecksInvariants) {
  Dialogue ok = make_dialogue("d1", Subject::kFeelings, 5);
  EXPECT_NO_THROW(validate(ok));
  EXPECT_EQ(ok.turn_pairs(), 5u);

  Dialogue empty_text = ok;
  empty_text.turns[2].text = "  ";
  EXPECT_EQ(code_of([&] { validate(empty_text); }), Errc::kInvalidDialogue);

  Dialogue bot_first = ok;
  bot_first.turns.erase(bot_first.turns.begin());
  EXPECT_EQ(code_of([&] { validate(bot_first); }), Errc::kInvalidDialogue);

  Dialogue wrong_kind = ok;
  wrong_kind.kind = DialogueKind::kGeneral;
  EXPECT_EQ(code_of([&] { validate(wrong_kind); }), Errc::kInvalidDialogue);

  Dialogue user_thoughts = ok;
  user_thoughts.turns[0].thoughts = "not allowed";
  EXPECT_EQ(code_of([&] { validate(user_thoughts); }), Errc::kInvalidDialogue);

  Dialogue negative_day = ok;
  negative_day.day_offset = -1;
  EXPECT_EQ(code_of([&] { validate(negative_day); }), Errc::kInvalidDialogue);
}

TEST(Dialogue, JsonRoundTripKeepsOptionalFields) {
  Dialogue d = make_dialogue("d1", Subject::kSkills, 2, "User is learning piano", 4);
  d.turns[1].thoughts = "too early";
  d.turns[1].shift = false;
  const nlohmann::json j = d;
  EXPECT_FALSE(j["turns"][0].contains("thoughts"));
  EXPECT_EQ(j.get<Dialogue>(), d);

  Dialogue untitled = make_dialogue("d2", Subject::kHumorousJokes, 1);
  const nlohmann::json u = untitled;
  EXPECT_TRUE(u["topic"].is_null());
  EXPECT_EQ(u.get<Dialogue>(), untitled);
}

TEST(Dialogue, JsonRejectsUnknownKeys) {
  nlohmann::json j = make_dialogue("d1", Subject::kSkills, 1);
  j["mood"] = "happy";
  EXPECT_EQ(code_of([&] { (void)j.get<Dialogue>(); }), Errc::kParseError);
}

TEST(Transcript, RendersSpeakerTags) {
  const std::vector<Utterance> turns = {Utterance::user("hi"), Utterance::bot("hello")};
  EXPECT_EQ(render_transcript(turns), "User: hi\nBot: hello\n");
}

TEST(HistoryBundle, RequiresSingleMemorableAnchor) {
  HistoryBundle b = make_bundle("anchor", 2);
  EXPECT_NO_THROW(validate(b));
  EXPECT_EQ(b.anchor().id, "anchor");
  EXPECT_NE(b.find("anchor-g1"), nullptr);
  EXPECT_EQ(b.find("nope"), nullptr);

  HistoryBundle missing = b;
  missing.anchor_id = "ghost";
  EXPECT_EQ(code_of([&] { validate(missing); }), Errc::kInvalidDialogue);

  HistoryBundle general_anchor = b;
  general_anchor.anchor_id = "anchor-g0";
  EXPECT_EQ(code_of([&] { validate(general_anchor); }), Errc::kInvalidDialogue);

  HistoryBundle dup = b;
  dup.dialogues.push_back(dup.dialogues.back());
  EXPECT_EQ(code_of([&] { validate(dup); }), Errc::kDuplicateId);

  const nlohmann::json j = b;
  EXPECT_EQ(j.get<HistoryBundle>(), b);
}

TEST(Error, CarriesCodeLineAndSubject) {
  const Error e(Errc::kParseError, "bad record", 2);
  EXPECT_EQ(e.code(), Errc::kParseError);
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.detail(), "bad record");
  EXPECT_NE(std::string(e.what()).find("ParseError"), std::string::npos);
  const Error a = e.attributed_to("dlg-7");
  EXPECT_EQ(a.subject(), "dlg-7");
  EXPECT_EQ(a.code(), Errc::kParseError);
  EXPECT_NE(std::string(a.what()).find("dlg-7"), std::string::npos);
}

}  // namespace
}  // namespace mnemo
