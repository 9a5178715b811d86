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

#ifndef MNEMO_TESTS_TURN_FIXTURES_H_
#define MNEMO_TESTS_TURN_FIXTURES_H_

#include <random>
#include <string>
#include <vector>

#include "mnemo/shift_engine.h"

namespace mnemo::testing {

// Well-formed turn outputs mixing scripts, punctuation and casing.
inline std::vector<TurnDecision> well_formed_turns(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> thoughts = {
      "user mentioned courses, a natural bridge to the job search",
      "too early, the user is still describing the weekend",
      "用户提到了课程，可以自然地联系到找工作",
      "The user sounds tired; keep it light.",
      "topic drifted to food: no link to the history yet",
  };
  static const std::vector<std::string> responses = {
      "这对你找工作也很有帮助！",
      "继续加油!",
      "That sounds fun. How long did the hike take?",
      "By the way, how is the piano going? Still practicing the prelude?",
      "Ha, I know that feeling: Mondays are rough.",
  };
  std::mt19937_64 rng(seed);
  std::vector<TurnDecision> out;
  for (std::size_t i = 0; i < n; ++i) {
    TurnDecision d;
    d.thoughts = thoughts[rng() % thoughts.size()] + " #" + std::to_string(i);
    d.shift = rng() % 2 == 0;
    d.response = responses[rng() % responses.size()];
    out.push_back(std::move(d));
  }
  return out;
}

// Each of these breaks the three-label contract in a different way.
inline std::vector<std::string> mutated_turns(const std::vector<TurnDecision>& base) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const TurnDecision& d = base[i];
    const std::string shift = d.shift ? "Yes" : "No";
    switch (i % 10) {
      case 0: out.push_back(d.thoughts + "\nShift: " + shift + "\nResponse: " + d.response); break;
      case 1: out.push_back("Thoughts: " + d.thoughts + "\nResponse: " + d.response); break;
      case 2: out.push_back("Thoughts: " + d.thoughts + "\nShift: " + shift + "\n" + d.response); break;
      case 3: out.push_back("Thoughts: " + d.thoughts + "\nShift: Maybe\nResponse: " + d.response); break;
      case 4: out.push_back("Shift: " + shift + "\nThoughts: " + d.thoughts + "\nResponse: " + d.response); break;
      case 5: out.push_back("Thoughts: " + d.thoughts + "\nShift: " + shift + "\nResponse:   "); break;
      case 6: out.push_back("Thoughts:\nShift: " + shift + "\nResponse: " + d.response); break;
      case 7: out.push_back("Thoughts: " + d.thoughts + "\nShift: " + shift + "\nnote: aside\nResponse: " + d.response); break;
      case 8: out.push_back("Thoughts: " + d.thoughts + "\nShift: Yes and No\nResponse: " + d.response); break;
      default: out.push_back(d.response); break;
    }
  }
  return out;
}

}  // namespace mnemo::testing

#endif  // MNEMO_TESTS_TURN_FIXTURES_H_
