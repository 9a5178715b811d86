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

#include "mnemo/shift_engine.h"

#include <cctype>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

constexpr std::string_view kShiftContract =
    "You are a warm, attentive chatbot in an ongoing conversation with a user. "
    "You also remember an earlier conversation with this user, shown below as "
    "history. At every turn, first consider whether this is a natural moment "
    "to steer the conversation toward the remembered topic, then reply. "
    "Answer in exactly three lines:\n"
    "Thoughts: <why now is or is not a good moment to bring up the history>\n"
    "Shift: <Yes or No>\n"
    "Response: <your reply to the user>";

constexpr std::string_view kUserRolePrompt =
    "You are role-playing the user in a casual chat with a chatbot. Write only "
    "the user's next message, in the user's voice. Keep the conversation "
    "going; never say goodbye or end the chat.";

struct Label {
  std::size_t line;
  std::string_view rest;
};

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    std::string_view line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::optional<Label> find_label(const std::vector<std::string_view>& lines,
                                std::string_view label, std::size_t from) {
  for (std::size_t i = from; i < lines.size(); ++i) {
    std::string_view l = text::trim(lines[i]);
    if (l.starts_with(label)) return Label{i, l.substr(label.size())};
  }
  return std::nullopt;
}

std::string join_block(const std::vector<std::string_view>& lines,
                       std::string_view first, std::size_t begin, std::size_t end) {
  std::string out(first);
  for (std::size_t i = begin; i < end; ++i) {
    out += '\n';
    out += lines[i];
  }
  return std::string(text::trim(out));
}

Error malformed(const std::string& why) { return Error(Errc::kMalformedTurn, why); }

void validate_opening(const std::vector<Utterance>& opening) {
  for (std::size_t i = 0; i < opening.size(); ++i) {
    const Speaker expected = i % 2 == 0 ? Speaker::kUser : Speaker::kBot;
    if (opening[i].speaker != expected) {
      throw Error(Errc::kPreconditionViolation, "opening must alternate user/bot");
    }
    validate(opening[i]);
  }
}

}  // namespace

const std::string_view kTurnRepairInstruction =
    "Your previous reply did not follow the required format. Reply again using "
    "exactly three lines starting with 'Thoughts:', 'Shift:' (Yes or No) and "
    "'Response:'.";

std::string_view to_string(RetrievalPolicy p) {
  return p == RetrievalPolicy::kPerSession ? "per_session" : "per_utterance";
}

RetrievalPolicy policy_from_string(std::string_view s) {
  if (s == "per_session") return RetrievalPolicy::kPerSession;
  if (s == "per_utterance") return RetrievalPolicy::kPerUtterance;
  throw Error(Errc::kConfigError, "unknown policy '" + std::string(s) + "'");
}

TurnDecision parse_turn_output(std::string_view raw) {
  const auto lines = split_lines(raw);
  const auto thoughts = find_label(lines, "Thoughts:", 0);
  if (!thoughts) throw malformed("missing 'Thoughts:'");
  const auto shift = find_label(lines, "Shift:", thoughts->line + 1);
  if (!shift) throw malformed("missing 'Shift:' after 'Thoughts:'");
  const auto response = find_label(lines, "Response:", shift->line + 1);
  if (!response) throw malformed("missing 'Response:' after 'Shift:'");

  TurnDecision d;
  d.thoughts = join_block(lines, thoughts->rest, thoughts->line + 1, shift->line);
  d.response = join_block(lines, response->rest, response->line + 1, lines.size());
  if (d.thoughts.empty()) throw malformed("empty thoughts");
  if (d.response.empty()) throw malformed("empty response");
  if (response->line != shift->line + 1) throw malformed("text between Shift and Response");

  std::string token;
  for (char c : shift->rest) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!std::ispunct(static_cast<unsigned char>(c)) &&
               !std::isspace(static_cast<unsigned char>(c))) {
      throw malformed("unexpected character in shift decision");
    }
  }
  if (token == "yes") {
    d.shift = true;
  } else if (token == "no") {
    d.shift = false;
  } else {
    throw malformed("shift decision must be Yes or No");
  }
  return d;
}

std::string format_turn_output(const TurnDecision& decision) {
  return "Thoughts: " + decision.thoughts + "\nShift: " +
         (decision.shift ? "Yes" : "No") + "\nResponse: " + decision.response;
}

const TopicEntry* SessionState::retrieved_topic() const {
  if (!retrieved || retrieved->topic_index >= topics.size()) return nullptr;
  return &topics[retrieved->topic_index];
}

void to_json(nlohmann::json& j, const TurnDecision& d) {
  j = nlohmann::json{{"thoughts", d.thoughts}, {"shift", d.shift}, {"response", d.response}};
}

void to_json(nlohmann::json& j, const SessionState& s) {
  const TopicEntry* t = s.retrieved_topic();
  j = nlohmann::json{
      {"bundle", s.bundle},
      {"topics", s.topics},
      {"context", s.context},
      {"retrieved", s.retrieved ? nlohmann::json(*s.retrieved) : nlohmann::json(nullptr)},
      {"retrieved_topic", t ? nlohmann::json(*t) : nlohmann::json(nullptr)},
      {"ranking", s.ranking},
      {"policy", to_string(s.policy)},
      {"transcript", s.transcript},
      {"turn_counter", s.turn_counter},
      {"shift_turn", s.shift_turn ? nlohmann::json(*s.shift_turn) : nlohmann::json(nullptr)},
      {"max_turns", s.max_turns},
      {"rank_calls", s.rank_calls}};
}

void to_json(nlohmann::json& j, const SessionOutcome& o) {
  j = nlohmann::json{
      {"transcript", o.transcript},
      {"shift_turn", o.shift_turn ? nlohmann::json(*o.shift_turn) : nlohmann::json(nullptr)},
      {"retrieved_topic",
       o.retrieved_topic ? nlohmann::json(*o.retrieved_topic) : nlohmann::json(nullptr)},
      {"turns", o.turns}};
}

GenerationRequest compose_shift_request(const Dialogue& memory,
                                        const TopicEntry& topic,
                                        std::span<const Utterance> transcript) {
  GenerationRequest req;
  req.messages.push_back({Role::kSystem, std::string(kShiftContract)});
  req.messages.push_back(
      {Role::kUser, "History (topic: " + topic.topic + "):\n" +
                        render_transcript(memory.turns)});
  req.messages.push_back(
      {Role::kUser, "Current conversation:\n" +
                        render_transcript({transcript.begin(), transcript.end()})});
  req.temperature = kDialogueTemperature;
  return req;
}

GenerationRequest compose_shift_prompt(const SessionState& state,
                                       const Dialogue* memory,
                                       const TopicEntry& topic) {
  if (memory == nullptr || memory->id != topic.dialogue_id) {
    throw Error(Errc::kMissingMemory, "no dialogue '" + topic.dialogue_id + "' in bundle");
  }
  return compose_shift_request(*memory, topic, state.transcript);
}

GenerationRequest user_turn_request(const HistoryBundle* persona,
                                    std::span<const Utterance> transcript) {
  std::string system(kUserRolePrompt);
  if (persona != nullptr) {
    std::string topics;
    for (const auto& d : persona->dialogues) {
      if (d.topic) topics += "- " + *d.topic + "\n";
    }
    if (!topics.empty()) system += "\nThings you have told the chatbot before:\n" + topics;
  }
  GenerationRequest req;
  req.messages.push_back({Role::kSystem, std::move(system)});
  req.messages.push_back(
      {Role::kUser, "Conversation so far:\n" +
                        render_transcript({transcript.begin(), transcript.end()}) +
                        "Write the user's next message."});
  req.temperature = kDialogueTemperature;
  req.max_tokens = 256;
  return req;
}

std::string clean_user_utterance(std::string_view raw) {
  std::string_view s = text::trim(raw);
  if (s.starts_with("User:")) s = text::trim(s.substr(5));
  return std::string(s);
}

TurnDecision generate_turn(Backend& backend, GenerationRequest request,
                           int repair_attempts) {
  for (int attempt = 0;; ++attempt) {
    const std::string raw = chat(backend, request);
    try {
      return parse_turn_output(raw);
    } catch (const Error& e) {
      if (e.code() != Errc::kMalformedTurn || attempt >= repair_attempts) throw;
      request.messages.push_back({Role::kAssistant, raw});
      request.messages.push_back({Role::kUser, std::string(kTurnRepairInstruction)});
    }
  }
}

std::optional<std::string> ScriptedUser::next_user_utterance(const SessionState&) {
  if (next_ >= lines_.size()) return std::nullopt;
  return lines_[next_++];
}

ShiftEngine::ShiftEngine(const RankerModel& model, Backend& backend, EngineOptions options)
    : model_(model), backend_(backend), options_(options), summarizer_(backend) {
  validate(model_);
}

void ShiftEngine::retrieve(SessionState& state) {
  validate(state.context, true);
  state.ranking = rank(model_, state.context, state.topics, backend_);
  state.retrieved = state.ranking.front();
  ++state.rank_calls;
}

SessionState ShiftEngine::open(HistoryBundle bundle, std::vector<Utterance> opening,
                               RetrievalPolicy policy, int max_turns) {
  validate(bundle);
  validate_opening(opening);
  if (max_turns < 1) throw Error(Errc::kRangeError, "max_turns must be >= 1");
  SessionState state;
  state.topics = summarizer_.ensure_topics(bundle);
  state.bundle = std::move(bundle);
  state.policy = policy;
  state.max_turns = max_turns;
  state.transcript = std::move(opening);
  state.context = ContextWindow::tail_of(state.transcript);
  if (!state.transcript.empty() && state.transcript.back().speaker == Speaker::kUser) {
    retrieve(state);
  }
  return state;
}

TurnDecision ShiftEngine::respond(SessionState& state) {
  if (state.turn_counter >= state.max_turns) {
    throw Error(Errc::kMaxTurnsExceeded, std::to_string(state.max_turns) + " turns");
  }
  if (state.transcript.empty() || state.transcript.back().speaker != Speaker::kUser) {
    throw Error(Errc::kPreconditionViolation, "no pending user utterance");
  }
  if (!state.retrieved) retrieve(state);
  const TopicEntry& topic = *state.retrieved_topic();
  const auto request =
      compose_shift_prompt(state, state.bundle.find(topic.dialogue_id), topic);

  GenerationRequest tuned = request;
  tuned.temperature = options_.temperature;
  tuned.max_tokens = options_.max_tokens;
  TurnDecision d = generate_turn(backend_, std::move(tuned), options_.repair_attempts);

  Utterance bot = Utterance::bot(d.response);
  bot.thoughts = d.thoughts;
  bot.shift = d.shift;
  state.transcript.push_back(std::move(bot));
  ++state.turn_counter;
  if (d.shift && !state.shift_turn) state.shift_turn = state.turn_counter;
  state.context = ContextWindow::tail_of(state.transcript);
  return d;
}

TurnDecision ShiftEngine::advance(SessionState& state, std::string_view user_text) {
  if (state.turn_counter >= state.max_turns) {
    throw Error(Errc::kMaxTurnsExceeded, std::to_string(state.max_turns) + " turns");
  }
  if (!state.transcript.empty() && state.transcript.back().speaker != Speaker::kBot) {
    throw Error(Errc::kPreconditionViolation, "previous user utterance is unanswered");
  }
  Utterance u = Utterance::user(std::string(text::trim(user_text)));
  validate(u);
  state.transcript.push_back(std::move(u));
  state.context = ContextWindow::tail_of(state.transcript);
  if (state.policy == RetrievalPolicy::kPerUtterance || !state.retrieved) retrieve(state);
  return respond(state);
}

std::pair<TurnDecision, SessionState> ShiftEngine::step(SessionState state,
                                                        std::string_view user_text) {
  TurnDecision d = advance(state, user_text);
  return {std::move(d), std::move(state)};
}

bool ShiftEngine::finished(const SessionState& state) const {
  if (state.turn_counter >= state.max_turns) return true;
  return !options_.run_to_cap && state.shift_turn.has_value();
}

SessionOutcome ShiftEngine::run_session(HistoryBundle bundle, std::vector<Utterance> opening,
                                        UserSource& user_source, RetrievalPolicy policy,
                                        int max_turns) {
  SessionState state = open(std::move(bundle), std::move(opening), policy, max_turns);
  if (!state.transcript.empty() && state.transcript.back().speaker == Speaker::kUser) {
    respond(state);
  }
  while (!finished(state)) {
    auto next = user_source.next_user_utterance(state);
    if (!next) throw Error(Errc::kSessionAborted, "user source exhausted");
    advance(state, *next);
  }
  SessionOutcome out;
  out.transcript = std::move(state.transcript);
  out.shift_turn = state.shift_turn;
  if (const TopicEntry* t = state.retrieved_topic()) out.retrieved_topic = *t;
  out.turns = state.turn_counter;
  return out;
}

}  // namespace mnemo
