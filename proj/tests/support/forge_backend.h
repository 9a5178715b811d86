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

#ifndef MNEMO_TESTS_FORGE_BACKEND_H_
#define MNEMO_TESTS_FORGE_BACKEND_H_

#include <regex>
#include <string>

#include "mnemo/gateway.h"
#include "scripted_backend.h"
#include "turn_fixtures.h"

namespace mnemo::testing {

// Content-driven stand-in for the generator model used by the corpus forge.
// Topic dialogues get 5-8 exchanges depending on the variation seed; the
// shift decision turns to Yes once the current conversation has
// `shift_after` user lines beyond the two-exchange opening.
inline ScriptedBackend::Handler forge_handler(int shift_after = 4) {
  return [shift_after](const GenerationRequest& r) -> std::string {
    const std::string& system = r.messages.front().text;
    const std::string last(r.last_user_text());
    if (system.find("training conversations") != std::string::npos) {
      std::smatch m;
      std::regex_search(last, m, std::regex(R"(Subject: ([^(]+) \(([a-z]+)\)\nVariation: (\d+))"));
      const std::string subject = m[1];
      const std::string seed = m[3];
      const int pairs = 5 + static_cast<int>(std::stoull(seed) % 4);
      std::string out = "Topic: User talked about " + subject + " #" + seed + "\n";
      for (int i = 0; i < pairs; ++i) {
        out += "User: my " + subject + " story " + seed + " part " + std::to_string(i) + "\n";
        out += "Bot: noted " + seed + "/" + std::to_string(i) + "\n";
      }
      return out;
    }
    if (system.find("Several days have passed") != std::string::npos) {
      return "User: Hi, it's me again!\nBot: Welcome back, how have you been?";
    }
    if (system.find("Continue this conversation") != std::string::npos) {
      return "User: Pretty good, just tired.\nBot: A quiet evening might help.";
    }
    if (system.find("Shift:") != std::string::npos) {
      std::size_t users = 0;
      for (std::size_t p = last.find("User: "); p != std::string::npos;
           p = last.find("User: ", p + 1)) {
        ++users;
      }
      const bool shift = static_cast<int>(users) >= 2 + shift_after;
      return format_turn_output({"counting turns", shift, shift ? "By the way, how did that go?"
                                                               : "I see, go on."});
    }
    if (system.find("role-playing the user") != std::string::npos) {
      std::size_t lines = 0;
      for (char c : last) lines += c == '\n';
      return "User: something else " + std::to_string(lines);
    }
    return "ECHO:" + last;
  };
}

}  // namespace mnemo::testing

#endif  // MNEMO_TESTS_FORGE_BACKEND_H_
