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

#ifndef MNEMO_DATA_FORGE_H_
#define MNEMO_DATA_FORGE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"

// Synthetic corpus construction in four steps:
//   1. a fixed catalog of memorable and general subjects;
//   2. per subject, a fine-grained topic with a 5-8 exchange dialogue, and
//      for each memorable anchor a history of 1-10 additional dialogues;
//   3. two opening turns of a later conversation, generated separately;
//   4. the rest of that conversation, where every bot turn carries Thoughts
//      and a Yes/No shift decision.
namespace mnemo {

struct SubjectCatalog {
  static std::span<const Subject> memorable() { return kMemorableSubjects; }
  static std::span<const Subject> general() { return kGeneralSubjects; }
};

struct ForgePlan {
  // Dialogues per general / memorable subject; general is always twice
  // memorable.
  int per_general = 4;
  int per_memorable = 2;
  // Memorable anchors that receive a history bundle and a current session.
  int continuations = 8;
  int min_turn_pairs = 5;
  int max_turn_pairs = 8;
  int min_history_extra = 1;
  int max_history_extra = 10;
  int current_max_turns = 10;
  // Judge distractors when the plan is used to build retrieval test sets.
  int distractors = 29;
  std::uint64_t seed = 42;

  // Full-size corpus: 250 per memorable and 500 per general subject.
  static ForgePlan chmap();
  // Test-set preset: 400 dialogues, 150 continuations, 29 distractors.
  static ForgePlan chmap_test();
  static ForgePlan preset(std::string_view name);

  int historical_total() const;
};

// Throws kRangeError on an inconsistent plan (including a ratio other
// than 2:1).
void validate(const ForgePlan& plan);

struct ForgeCounters {
  int regenerations = 0;
  int dropped_turn_bounds = 0;
  int dropped_unparseable = 0;
  int dropped_malformed_sessions = 0;

  friend bool operator==(const ForgeCounters&, const ForgeCounters&) = default;
};

struct ForgeDataset {
  std::vector<Dialogue> historical;
  std::vector<HistoryBundle> bundles;
  std::vector<Dialogue> current;
  ForgeCounters counters;
};

// Seeded selection of `k` dialogues from `pool` (anchor excluded) placed
// around the anchor, with day offsets strictly decreasing toward today.
// Throws kRangeError (k outside 1..10), kPoolExhausted, kInvalidDialogue.
HistoryBundle assemble_history(const Dialogue& anchor, std::span<const Dialogue> pool,
                               int k, std::uint64_t seed);

GenerationRequest topic_dialogue_request(Subject subject, const ForgePlan& plan,
                                         std::uint64_t seed, int attempt);
// Parses "Topic: ..." followed by "User: ..." / "Bot: ..." lines.
// Throws kParseError.
Dialogue parse_topic_dialogue(std::string_view raw, std::string id, Subject subject);

GenerationRequest first_continuation_request(const Dialogue& anchor);
// Built from the first continuation turn only; never sees the anchor.
GenerationRequest second_continuation_request(std::span<const Utterance> first_turn);

class Forge {
 public:
  Forge(Backend& backend, ForgePlan plan);

  // Step 2. Regenerates up to twice when the exchange count is out of
  // bounds, then throws kTurnBoundViolation.
  Dialogue generate_topic_dialogue(Subject subject, DialogueKind kind, std::uint64_t seed);

  // Step 3: four utterances (two exchanges). Throws kEmptyTopic.
  std::vector<Utterance> continue_dialogue(const HistoryBundle& bundle);

  // Step 4. Returns nullopt and counts a drop when a bot turn stays
  // malformed after repairs.
  std::optional<Dialogue> generate_current_session(const HistoryBundle& bundle,
                                                   const std::vector<Utterance>& opening,
                                                   int max_turns = 10);

  // All four steps for the whole plan.
  ForgeDataset run();

  const ForgeCounters& counters() const { return counters_; }
  const ForgePlan& plan() const { return plan_; }

 private:
  Backend& backend_;
  ForgePlan plan_;
  ForgeCounters counters_;
};

struct PartitionStats {
  std::size_t dialogues = 0;
  // Dialogue utterances only; Thoughts are counted separately.
  std::size_t utterances = 0;
  std::size_t unique_tokens = 0;
  std::size_t thoughts = 0;
  std::size_t topic_shift_sessions = 0;
  // Mean utterance length in characters (code points).
  double avg_utterance_length = 0.0;
  double avg_utterances_per_session = 0.0;
};

struct StatsReport {
  PartitionStats historical;
  PartitionStats current;
};

PartitionStats partition_stats(std::span<const Dialogue> dialogues);
// Throws kEmptySet when both partitions are empty.
StatsReport forge_stats(std::span<const Dialogue> historical,
                        std::span<const Dialogue> current);

void to_json(nlohmann::json& j, const PartitionStats& s);
void to_json(nlohmann::json& j, const StatsReport& r);
void to_json(nlohmann::json& j, const ForgeCounters& c);

}  // namespace mnemo

#endif  // MNEMO_DATA_FORGE_H_
