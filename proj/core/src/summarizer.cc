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

#include "mnemo/summarizer.h"

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

constexpr std::string_view kSummarizeInstruction =
    "Summarize this conversation into one short topic sentence naming the "
    "user-specific fact or event. Reply with the sentence only.";

// Models sometimes prefix the answer; keep the first non-empty line and drop
// a leading "Topic:" label.
std::string clean_topic(std::string_view raw) {
  std::string_view line;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    line = text::trim(raw.substr(start, end - start));
    if (!line.empty()) break;
    start = end + 1;
  }
  if (line.starts_with("Topic:")) line = text::trim(line.substr(6));
  return text::truncate_at_word(line, kTopicCharCap);
}

std::string transcript_key(const Dialogue& d) {
  return fingerprint(summarization_request(d));
}

}  // namespace

GenerationRequest summarization_request(const Dialogue& dialogue) {
  GenerationRequest req;
  req.messages.push_back({Role::kSystem, std::string(kSummarizeInstruction)});
  req.messages.push_back({Role::kUser, render_transcript(dialogue.turns)});
  req.temperature = kJudgeTemperature;
  req.max_tokens = 64;
  return req;
}

TopicEntry summarize_topic(const Dialogue& dialogue, Backend& backend) {
  if (dialogue.turns.empty()) throw Error(Errc::kEmptyDialogue, dialogue.id);
  const std::string topic = clean_topic(chat(backend, summarization_request(dialogue)));
  if (topic.empty()) throw Error(Errc::kEmptyCompletion, "summary for " + dialogue.id);
  return TopicEntry{dialogue.id, topic, TopicSource::kGenerated};
}

TopicEntry Summarizer::summarize(const Dialogue& dialogue) {
  if (dialogue.turns.empty()) throw Error(Errc::kEmptyDialogue, dialogue.id);
  auto key = std::make_pair(dialogue.id, transcript_key(dialogue));
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  TopicEntry entry = summarize_topic(dialogue, backend_);
  std::lock_guard lock(mu_);
  return cache_.emplace(std::move(key), std::move(entry)).first->second;
}

std::vector<TopicEntry> Summarizer::ensure_topics(const HistoryBundle& bundle) {
  std::vector<TopicEntry> entries;
  entries.reserve(bundle.dialogues.size());
  for (const auto& d : bundle.dialogues) {
    if (d.topic && !text::is_blank(*d.topic)) {
      entries.push_back({d.id, text::truncate_at_word(*d.topic, kTopicCharCap),
                         TopicSource::kProvided});
      continue;
    }
    try {
      entries.push_back(summarize(d));
    } catch (const Error& e) {
      throw e.attributed_to(d.id);
    }
  }
  return entries;
}

std::size_t Summarizer::cache_size() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::vector<TopicEntry> ensure_topics(const HistoryBundle& bundle, Backend& backend) {
  return Summarizer(backend).ensure_topics(bundle);
}

void to_json(nlohmann::json& j, const TopicEntry& t) {
  j = nlohmann::json{{"dialogue_id", t.dialogue_id},
                     {"topic", t.topic},
                     {"source", t.source == TopicSource::kGenerated ? "generated"
                                                                     : "provided"}};
}

void from_json(const nlohmann::json& j, TopicEntry& t) {
  t.dialogue_id = j.at("dialogue_id").get<std::string>();
  t.topic = j.at("topic").get<std::string>();
  const auto source = j.value("source", std::string("provided"));
  t.source = source == "generated" ? TopicSource::kGenerated : TopicSource::kProvided;
}

}  // namespace mnemo
