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

#ifndef MNEMO_SUMMARIZER_H_
#define MNEMO_SUMMARIZER_H_

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"

namespace mnemo {

inline constexpr std::size_t kTopicCharCap = 64;

enum class TopicSource { kGenerated, kProvided };

struct TopicEntry {
  std::string dialogue_id;
  std::string topic;
  TopicSource source = TopicSource::kGenerated;

  friend bool operator==(const TopicEntry&, const TopicEntry&) = default;
};

// The exact request sent to summarize one dialogue.
GenerationRequest summarization_request(const Dialogue& dialogue);

// One-sentence topic for `dialogue`, capped at kTopicCharCap characters.
// Throws kEmptyDialogue for a dialogue without turns.
TopicEntry summarize_topic(const Dialogue& dialogue, Backend& backend);

// Condenses a history bundle into one topic per dialogue, in bundle order.
// Results are cached by dialogue id and transcript hash, so a dialogue is
// summarized at most once per Summarizer.
class Summarizer {
 public:
  explicit Summarizer(Backend& backend) : backend_(backend) {}

  TopicEntry summarize(const Dialogue& dialogue);

  // Pre-labelled dialogues keep their topic (source = provided). Errors are
  // rethrown attributed to the failing dialogue id.
  std::vector<TopicEntry> ensure_topics(const HistoryBundle& bundle);

  std::size_t cache_size() const;

 private:
  Backend& backend_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, TopicEntry> cache_;
};

std::vector<TopicEntry> ensure_topics(const HistoryBundle& bundle, Backend& backend);

void to_json(nlohmann::json& j, const TopicEntry& t);
void from_json(const nlohmann::json& j, TopicEntry& t);

}  // namespace mnemo

#endif  // MNEMO_SUMMARIZER_H_
