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

#ifndef MNEMO_TESTS_SESSION_FIXTURES_H_
#define MNEMO_TESTS_SESSION_FIXTURES_H_

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mnemo/dialogue.h"

namespace mnemo::testing {

// Contents of fixtures/s1/session.json.
struct SessionFixture {
  HistoryBundle bundle;
  std::vector<Utterance> opening;
  std::vector<std::string> user_script;

  static SessionFixture load(const std::string& dir) {
    std::ifstream in(dir + "/session.json");
    const auto j = nlohmann::json::parse(in);
    SessionFixture f;
    f.bundle = j.at("bundle").get<HistoryBundle>();
    f.opening = j.at("opening").get<std::vector<Utterance>>();
    f.user_script = j.at("user_script").get<std::vector<std::string>>();
    return f;
  }
};

inline std::string s1_dir() { return std::string(MNEMO_FIXTURE_DIR) + "/s1"; }

}  // namespace mnemo::testing

#endif  // MNEMO_TESTS_SESSION_FIXTURES_H_
