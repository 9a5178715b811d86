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

#include "mnemo/data_forge.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/ranker.h"
#include "mnemo/shift_engine.h"
#include "mnemo/summarizer.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

constexpr int kTopicDialogueAttempts = 3;
constexpr int kMaxDayGap = 7;

std::string slug(Subject s) {
  std::string out;
  for (char c : to_string(s)) {
    if (c == ' ') {
      out.push_back('-');
    } else if (c != '\'') {
      out.push_back(c);
    }
  }
  return out;
}

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// "User: ..." / "Bot: ..." lines; unlabeled lines continue the previous turn.
std::vector<Utterance> parse_labeled_turns(const std::vector<std::string_view>& lines) {
  std::vector<Utterance> turns;
  for (std::string_view raw : lines) {
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("User:")) {
      turns.push_back(Utterance::user(std::string(text::trim(line.substr(5)))));
    } else if (line.starts_with("Bot:")) {
      turns.push_back(Utterance::bot(std::string(text::trim(line.substr(4)))));
    } else if (!turns.empty()) {
      turns.back().text += "\n" + std::string(line);
    } else {
      throw Error(Errc::kParseError, "text before the first speaker label");
    }
  }
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const Speaker expected = i % 2 == 0 ? Speaker::kUser : Speaker::kBot;
    if (turns[i].speaker != expected) {
      throw Error(Errc::kParseError, "speakers do not alternate starting with User");
    }
    if (text::is_blank(turns[i].text)) throw Error(Errc::kParseError, "empty utterance");
  }
  return turns;
}

std::vector<std::string_view> lines_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<Utterance> parse_exchange(std::string_view raw) {
  auto turns = parse_labeled_turns(lines_of(raw));
  if (turns.size() != 2) {
    throw Error(Errc::kParseError, "expected exactly one User and one Bot line");
  }
  return turns;
}

}  // namespace

ForgePlan ForgePlan::chmap() {
  ForgePlan p;
  p.per_general = 500;
  p.per_memorable = 250;
  p.continuations = 1500;
  return p;
}

ForgePlan ForgePlan::chmap_test() {
  ForgePlan p;
  p.per_general = 50;
  p.per_memorable = 25;
  p.continuations = 150;
  p.distractors = 29;
  return p;
}

ForgePlan ForgePlan::preset(std::string_view name) {
  if (name == "chmap") return chmap();
  if (name == "chmap-test") return chmap_test();
  if (name == "small") return ForgePlan{};
  throw Error(Errc::kConfigError, "unknown forge preset '" + std::string(name) + "'");
}

int ForgePlan::historical_total() const {
  return per_memorable * static_cast<int>(kMemorableSubjects.size()) +
         per_general * static_cast<int>(kGeneralSubjects.size());
}

void validate(const ForgePlan& plan) {
  auto fail = [](const std::string& why) { throw Error(Errc::kRangeError, why); };
  if (plan.per_memorable < 1) fail("per_memorable must be >= 1");
  if (plan.per_general != 2 * plan.per_memorable) {
    fail("general:memorable dialogues per subject must be 2:1");
  }
  if (plan.min_turn_pairs < 1 || plan.min_turn_pairs > plan.max_turn_pairs) {
    fail("bad turn bounds");
  }
  if (plan.min_history_extra < 1 || plan.max_history_extra > 10 ||
      plan.min_history_extra > plan.max_history_extra) {
    fail("history extras must lie within 1..10");
  }
  if (plan.continuations < 0 ||
      plan.continuations > plan.per_memorable * static_cast<int>(kMemorableSubjects.size())) {
    fail("more continuations than memorable dialogues");
  }
  if (plan.current_max_turns < 1) fail("current_max_turns must be >= 1");
  if (plan.distractors < 1) fail("distractors must be >= 1");
}

HistoryBundle assemble_history(const Dialogue& anchor, std::span<const Dialogue> pool,
                               int k, std::uint64_t seed) {
  if (anchor.kind != DialogueKind::kMemorable) {
    throw Error(Errc::kInvalidDialogue, "anchor '" + anchor.id + "' is not memorable");
  }
  if (k < 1 || k > 10) throw Error(Errc::kRangeError, "k must lie within 1..10");
  std::vector<const Dialogue*> candidates;
  for (const auto& d : pool) {
    if (d.id != anchor.id) candidates.push_back(&d);
  }
  if (candidates.size() < static_cast<std::size_t>(k)) {
    throw Error(Errc::kPoolExhausted, "pool has " + std::to_string(candidates.size()) +
                                          " dialogues, need " + std::to_string(k));
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    std::swap(candidates[i], candidates[i + index_draw(rng, candidates.size() - i)]);
  }
  HistoryBundle bundle;
  bundle.anchor_id = anchor.id;
  for (int i = 0; i < k; ++i) bundle.dialogues.push_back(*candidates[i]);
  const std::size_t anchor_pos = index_draw(rng, bundle.dialogues.size() + 1);
  bundle.dialogues.insert(bundle.dialogues.begin() + static_cast<std::ptrdiff_t>(anchor_pos),
                          anchor);

  // Oldest first: walk backwards from today adding 1..7 day gaps.
  int offset = 0;
  for (auto it = bundle.dialogues.rbegin(); it != bundle.dialogues.rend(); ++it) {
    offset += 1 + static_cast<int>(index_draw(rng, kMaxDayGap));
    it->day_offset = offset;
  }
  validate(bundle);
  return bundle;
}

GenerationRequest topic_dialogue_request(Subject subject, const ForgePlan& plan,
                                         std::uint64_t seed, int attempt) {
  const std::string bounds =
      std::to_string(plan.min_turn_pairs) + " and " + std::to_string(plan.max_turn_pairs);
  std::string system =
      "You create training conversations for a chatbot. Invent one "
      "fine-grained topic within the given subject and write a natural "
      "conversation about it between a user and a chatbot, with between " +
      bounds +
      " exchanges (an exchange is one user line followed by one bot line). "
      "Output format:\nTopic: <one short sentence about the user or the "
      "subject>\nUser: <text>\nBot: <text>\n...";
  std::string user = "Subject: " + std::string(to_string(subject)) + " (" +
                     std::string(to_string(kind_of(subject))) +
                     ")\nVariation: " + std::to_string(seed);
  if (attempt > 0) user += "\nAttempt: " + std::to_string(attempt + 1);
  GenerationRequest req;
  req.messages.push_back({Role::kSystem, std::move(system)});
  req.messages.push_back({Role::kUser, std::move(user)});
  req.temperature = kDialogueTemperature;
  req.max_tokens = 2048;
  return req;
}

Dialogue parse_topic_dialogue(std::string_view raw, std::string id, Subject subject) {
  auto lines = lines_of(raw);
  std::size_t first = 0;
  while (first < lines.size() && text::is_blank(lines[first])) ++first;
  if (first == lines.size()) throw Error(Errc::kParseError, "empty generation");
  std::string_view head = text::trim(lines[first]);
  if (!head.starts_with("Topic:")) throw Error(Errc::kParseError, "missing 'Topic:' line");
  const std::string topic = text::truncate_at_word(head.substr(6), kTopicCharCap);
  if (topic.empty()) throw Error(Errc::kParseError, "empty topic");

  Dialogue d;
  d.id = std::move(id);
  d.subject = subject;
  d.kind = kind_of(subject);
  d.topic = topic;
  d.turns = parse_labeled_turns({lines.begin() + static_cast<std::ptrdiff_t>(first) + 1,
                                 lines.end()});
  if (d.turns.empty() || d.turns.size() % 2 != 0) {
    throw Error(Errc::kParseError, "dialogue must end with a bot line");
  }
  return d;
}

GenerationRequest first_continuation_request(const Dialogue& anchor) {
  GenerationRequest req;
  req.messages.push_back(
      {Role::kSystem,
       "Several days have passed since the conversation below. Write the "
       "first exchange of a new conversation between the same user and "
       "chatbot that stays consistent with it. Output exactly two lines:\n"
       "User: <text>\nBot: <text>"});
  req.messages.push_back({Role::kUser, "Topic: " + anchor.topic.value_or("") + "\n" +
                                           render_transcript(anchor.turns)});
  req.temperature = kDialogueTemperature;
  req.max_tokens = 512;
  return req;
}

GenerationRequest second_continuation_request(std::span<const Utterance> first_turn) {
  GenerationRequest req;
  req.messages.push_back(
      {Role::kSystem,
       "Continue this conversation with one more exchange that follows only "
       "from what was just said. Output exactly two lines:\n"
       "User: <text>\nBot: <text>"});
  req.messages.push_back(
      {Role::kUser, render_transcript({first_turn.begin(), first_turn.end()})});
  req.temperature = kDialogueTemperature;
  req.max_tokens = 512;
  return req;
}

Forge::Forge(Backend& backend, ForgePlan plan) : backend_(backend), plan_(plan) {
  validate(plan_);
}

Dialogue Forge::generate_topic_dialogue(Subject subject, DialogueKind kind,
                                        std::uint64_t seed) {
  if (kind_of(subject) != kind) {
    throw Error(Errc::kPreconditionViolation,
                std::string(to_string(subject)) + " is not " + std::string(to_string(kind)));
  }
  const std::string id = std::string(kind == DialogueKind::kMemorable ? "mem-" : "gen-") +
                         slug(subject) + "-" + std::to_string(seed);
  std::size_t last_pairs = 0;
  for (int attempt = 0; attempt < kTopicDialogueAttempts; ++attempt) {
    if (attempt > 0) ++counters_.regenerations;
    const std::string raw = chat(backend_, topic_dialogue_request(subject, plan_, seed, attempt));
    Dialogue d = parse_topic_dialogue(raw, id, subject);
    last_pairs = d.turn_pairs();
    if (last_pairs >= static_cast<std::size_t>(plan_.min_turn_pairs) &&
        last_pairs <= static_cast<std::size_t>(plan_.max_turn_pairs)) {
      validate(d);
      return d;
    }
  }
  throw Error(Errc::kTurnBoundViolation,
              id + " has " + std::to_string(last_pairs) + " exchanges after " +
                  std::to_string(kTopicDialogueAttempts) + " attempts");
}

std::vector<Utterance> Forge::continue_dialogue(const HistoryBundle& bundle) {
  validate(bundle);
  const Dialogue& anchor = bundle.anchor();
  if (!anchor.topic || text::is_blank(*anchor.topic)) {
    throw Error(Errc::kEmptyTopic, "anchor '" + anchor.id + "' has no topic");
  }
  auto opening = parse_exchange(chat(backend_, first_continuation_request(anchor)));
  auto second = parse_exchange(chat(backend_, second_continuation_request(opening)));
  opening.insert(opening.end(), second.begin(), second.end());
  return opening;
}

std::optional<Dialogue> Forge::generate_current_session(const HistoryBundle& bundle,
                                                        const std::vector<Utterance>& opening,
                                                        int max_turns) {
  validate(bundle);
  const Dialogue& anchor = bundle.anchor();
  if (!anchor.topic) throw Error(Errc::kEmptyTopic, "anchor '" + anchor.id + "' has no topic");
  const TopicEntry topic{anchor.id, *anchor.topic, TopicSource::kProvided};

  Dialogue current;
  current.id = "cur-" + anchor.id;
  current.kind = anchor.kind;
  current.subject = anchor.subject;
  current.topic = anchor.topic;
  current.turns = opening;
  validate(current);
  if (!current.turns.empty() && current.turns.back().speaker != Speaker::kBot) {
    throw Error(Errc::kPreconditionViolation, "opening must end with a bot turn");
  }

  std::optional<int> shift_turn;
  for (int turn = 1; turn <= max_turns; ++turn) {
    current.turns.push_back(Utterance::user(clean_user_utterance(
        chat(backend_, user_turn_request(&bundle, current.turns)))));
    validate(current.turns.back());
    TurnDecision d;
    try {
      d = generate_turn(backend_, compose_shift_request(anchor, topic, current.turns), 2);
    } catch (const Error& e) {
      if (e.code() != Errc::kMalformedTurn) throw;
      ++counters_.dropped_malformed_sessions;
      return std::nullopt;
    }
    Utterance bot = Utterance::bot(d.response);
    bot.thoughts = d.thoughts;
    bot.shift = d.shift;
    current.turns.push_back(std::move(bot));
    if (d.shift && !shift_turn) {
      shift_turn = turn;
    } else if (shift_turn) {
      break;  // one closing exchange after the shift
    }
  }
  validate(current);
  return current;
}

ForgeDataset Forge::run() {
  ForgeDataset out;
  std::uint64_t ordinal = 0;
  auto forge_subject = [&](Subject s, int count) {
    for (int i = 0; i < count; ++i) {
      const std::uint64_t seed = plan_.seed * 100003ULL + ++ordinal;
      try {
        out.historical.push_back(generate_topic_dialogue(s, kind_of(s), seed));
      } catch (const Error& e) {
        if (e.code() == Errc::kTurnBoundViolation) {
          ++counters_.dropped_turn_bounds;
        } else if (e.code() == Errc::kParseError || e.code() == Errc::kInvalidDialogue) {
          ++counters_.dropped_unparseable;
        } else {
          throw;
        }
      }
    }
  };
  for (Subject s : SubjectCatalog::memorable()) forge_subject(s, plan_.per_memorable);
  for (Subject s : SubjectCatalog::general()) forge_subject(s, plan_.per_general);

  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < out.historical.size(); ++i) {
    if (out.historical[i].kind == DialogueKind::kMemorable) anchors.push_back(i);
  }
  std::mt19937_64 rng(plan_.seed);
  std::shuffle(anchors.begin(), anchors.end(), rng);
  const std::size_t wanted =
      std::min(anchors.size(), static_cast<std::size_t>(plan_.continuations));

  for (std::size_t a = 0; a < wanted; ++a) {
    const Dialogue& anchor = out.historical[anchors[a]];
    const int pool_size = static_cast<int>(out.historical.size()) - 1;
    const int hi = std::min(plan_.max_history_extra, pool_size);
    if (hi < plan_.min_history_extra) break;
    const int k = plan_.min_history_extra +
                  static_cast<int>(index_draw(rng, static_cast<std::size_t>(
                                                       hi - plan_.min_history_extra + 1)));
    HistoryBundle bundle = assemble_history(anchor, out.historical, k, rng());
    const auto opening = continue_dialogue(bundle);
    auto current = generate_current_session(bundle, opening, plan_.current_max_turns);
    if (current) {
      out.bundles.push_back(std::move(bundle));
      out.current.push_back(std::move(*current));
    }
  }
  out.counters = counters_;
  return out;
}

PartitionStats partition_stats(std::span<const Dialogue> dialogues) {
  PartitionStats s;
  s.dialogues = dialogues.size();
  std::set<std::string> vocabulary;
  std::size_t chars = 0;
  for (const auto& d : dialogues) {
    bool shifted = false;
    for (const auto& u : d.turns) {
      ++s.utterances;
      chars += text::char_count(u.text);
      for (auto& tok : text::tokenize_mixed(u.text)) vocabulary.insert(std::move(tok));
      if (u.thoughts) ++s.thoughts;
      shifted = shifted || u.shift.value_or(false);
    }
    if (shifted) ++s.topic_shift_sessions;
  }
  s.unique_tokens = vocabulary.size();
  if (s.utterances > 0) {
    s.avg_utterance_length = static_cast<double>(chars) / static_cast<double>(s.utterances);
  }
  if (s.dialogues > 0) {
    s.avg_utterances_per_session =
        static_cast<double>(s.utterances) / static_cast<double>(s.dialogues);
  }
  return s;
}

StatsReport forge_stats(std::span<const Dialogue> historical,
                        std::span<const Dialogue> current) {
  if (historical.empty() && current.empty()) throw Error(Errc::kEmptySet, "empty dataset");
  return StatsReport{partition_stats(historical), partition_stats(current)};
}

void to_json(nlohmann::json& j, const PartitionStats& s) {
  j = nlohmann::json{{"dialogues", s.dialogues},
                     {"utterances", s.utterances},
                     {"unique_tokens", s.unique_tokens},
                     {"thoughts", s.thoughts},
                     {"topic_shift_sessions", s.topic_shift_sessions},
                     {"avg_utterance_length", s.avg_utterance_length},
                     {"avg_utterances_per_session", s.avg_utterances_per_session}};
}

void to_json(nlohmann::json& j, const StatsReport& r) {
  j = nlohmann::json{{"historical", r.historical}, {"current", r.current}};
}

void to_json(nlohmann::json& j, const ForgeCounters& c) {
  j = nlohmann::json{{"regenerations", c.regenerations},
                     {"dropped_turn_bounds", c.dropped_turn_bounds},
                     {"dropped_unparseable", c.dropped_unparseable},
                     {"dropped_malformed_sessions", c.dropped_malformed_sessions}};
}

}  // namespace mnemo
