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

#include "mnemo/gateway.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/mock_backend.h"
#include "temp_dir.h"

namespace mnemo {
namespace {

const std::string kFixtures = MNEMO_FIXTURE_DIR;

GenerationRequest hello_request() {
  GenerationRequest r;
  r.messages = {{Role::kSystem, "You are a helpful assistant."},
                {Role::kUser, "Say hello in Chinese."}};
  return r;
}

TEST(Fingerprint, IsStableAndMatchesIndependentEncoder) {
  // Keys written by tests/oracles/fixture_oracle.py.
  EXPECT_EQ(fingerprint(hello_request()), "566d3dbcefac28e2");
  EXPECT_EQ(fingerprint(hello_request()), fingerprint(hello_request()));
}

TEST(Fingerprint, OneCharacterPerturbationsDoNotCollide) {
  std::mt19937_64 rng(42);
  const GenerationRequest base = hello_request();
  std::set<std::string> seen = {fingerprint(base)};
  for (int i = 0; i < 100; ++i) {
    GenerationRequest r = base;
    auto& text = r.messages[rng() % 2].text;
    const std::size_t pos = rng() % text.size();
    char c = text[pos];
    while (c == text[pos]) c = static_cast<char>('a' + rng() % 26);
    text[pos] = c;
    if (i % 2 == 0) text += std::to_string(i);  // keep all 100 variants distinct
    seen.insert(fingerprint(r));
  }
  EXPECT_EQ(seen.size(), 101u);
}

TEST(Fingerprint, SensitiveToOrderAndSampling) {
  GenerationRequest a;
  a.messages = {{Role::kUser, "first"}, {Role::kUser, "second"}};
  GenerationRequest b;
  b.messages = {{Role::kUser, "second"}, {Role::kUser, "first"}};
  EXPECT_NE(fingerprint(a), fingerprint(b));

  GenerationRequest warm = a;
  warm.temperature = 0.7;
  EXPECT_NE(fingerprint(a), fingerprint(warm));
  GenerationRequest longer = a;
  longer.max_tokens = 1024;
  EXPECT_NE(fingerprint(a), fingerprint(longer));
  GenerationRequest seeded = a;
  seeded.seed = 9;
  EXPECT_EQ(fingerprint(a), fingerprint(seeded));

  // Boundaries matter: "ab"+"c" and "a"+"bc" are different requests.
  GenerationRequest s1, s2;
  s1.messages = {{Role::kUser, "ab"}, {Role::kUser, "c"}};
  s2.messages = {{Role::kUser, "a"}, {Role::kUser, "bc"}};
  EXPECT_NE(fingerprint(s1), fingerprint(s2));
}

TEST(Request, ValidateRejectsBadShapes) {
  GenerationRequest r;
  EXPECT_THROW(validate(r), Error);
  r.messages = {{Role::kAssistant, "hi"}};
  EXPECT_THROW(validate(r), Error);
  r.messages = {{Role::kUser, "hi"}};
  r.temperature = -0.1;
  EXPECT_THROW(validate(r), Error);
  r.temperature = 0.0;
  r.max_tokens = 0;
  EXPECT_THROW(validate(r), Error);
  r.max_tokens = 1;
  EXPECT_NO_THROW(validate(r));
}

TEST(HashedEmbedding, DeterministicAndUnitNorm) {
  const auto a = hashed_embedding("abc");
  const auto b = hashed_embedding("abc");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dim(), kDefaultEmbeddingDim);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
}

TEST(HashedEmbedding, MatchesIndependentTrigramHash) {
  // Buckets and cosine from tests/oracles/fixture_oracle.py.
  const auto abc = hashed_embedding("abc");
  const auto abd = hashed_embedding("abd");
  std::vector<std::size_t> nz_abc, nz_abd;
  for (std::size_t i = 0; i < abc.dim(); ++i) {
    if (abc[i] != 0.0) nz_abc.push_back(i);
    if (abd[i] != 0.0) nz_abd.push_back(i);
  }
  EXPECT_EQ(nz_abc, (std::vector<std::size_t>{69, 166, 173}));
  EXPECT_EQ(nz_abd, (std::vector<std::size_t>{9, 69, 138}));
  EXPECT_NEAR(abc[69], 0.5773502691896258, 1e-15);
  double cos = 0.0;
  for (std::size_t i = 0; i < abc.dim(); ++i) cos += abc[i] * abd[i];
  EXPECT_NEAR(cos, 1.0 / 3.0, 1e-12);
  EXPECT_NE(abc, abd);
}

TEST(HashedEmbedding, RejectsBlankText) {
  try {
    hashed_embedding("   ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidRequest);
  }
}

TEST(MockBackend, FingerprintFixtureWins) {
  MockBackend mock(MockFixtures::load_dir(kFixtures + "/mock_basic"));
  EXPECT_EQ(chat(mock, hello_request()), "你好");
}

TEST(MockBackend, FallsBackToEcho) {
  MockBackend mock;
  GenerationRequest r;
  r.messages = {{Role::kSystem, "sys"}, {Role::kUser, "where am I"}};
  EXPECT_EQ(chat(mock, r), "ECHO:where am I");
  EXPECT_EQ(chat(mock, r), chat(mock, r));
}

TEST(MockBackend, RulesMatchOnContentInOrder) {
  MockFixtures f;
  f.rules.push_back({"piano", "", "", "first"});
  f.rules.push_back({"", "judge", "", "second"});
  f.rules.push_back({"", "", "", "catch-all"});
  MockBackend mock(f);
  GenerationRequest r;
  r.messages = {{Role::kSystem, "you judge"}, {Role::kUser, "I play piano"}};
  EXPECT_EQ(chat(mock, r), "first");
  r.messages[1].text = "I play drums";
  EXPECT_EQ(chat(mock, r), "second");
  r.messages[0].text = "other";
  EXPECT_EQ(chat(mock, r), "catch-all");
}

TEST(MockBackend, LoadsRulesAndVectorsFromDirectory) {
  testing::TempDir dir;
  std::ofstream(dir / "chat.json") << R"({"responses": {},
    "rules": [{"when": {"last_user_contains": "ping"}, "reply": "pong"}]})";
  std::ofstream(dir / "embeddings.json") << R"({"dim": 3, "vectors": {"x": [1, 0, 0]}})";
  MockBackend mock(MockFixtures::load_dir(dir.path()));
  GenerationRequest r;
  r.messages = {{Role::kUser, "ping?"}};
  EXPECT_EQ(chat(mock, r), "pong");
  const std::vector<std::string> texts = {"x", "y", "z"};
  const auto v = embed(mock, texts);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], EmbeddingVector({1, 0, 0}));
  EXPECT_EQ(v[1].dim(), 3u);
  EXPECT_EQ(v[2].dim(), 3u);
}

TEST(MockBackend, BadFixtureFileIsParseError) {
  testing::TempDir dir;
  std::ofstream(dir / "chat.json") << R"({"responses": {}, "rulez": []})";
  try {
    MockFixtures::load_dir(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kParseError);
  }
}

class BlankBackend : public MockBackend {
 public:
  std::string complete(const GenerationRequest&) override { return " \n"; }
};

TEST(Chat, BlankCompletionIsAnError) {
  BlankBackend blank;
  try {
    chat(blank, hello_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyCompletion);
  }
}

TEST(Embed, PreservesArityAndRejectsBlankText) {
  MockBackend mock;
  const std::vector<std::string> three = {"a", "b", "c"};
  const auto out = embed(mock, three);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& v : out) EXPECT_EQ(v.dim(), kDefaultEmbeddingDim);
  const std::vector<std::string> blank = {"a", ""};
  EXPECT_THROW(embed(mock, blank), Error);
}

TEST(RecordingBackend, KeepsRequests) {
  MockBackend mock;
  RecordingBackend rec(mock);
  chat(rec, hello_request());
  const std::vector<std::string> t = {"q"};
  embed(rec, t);
  ASSERT_EQ(rec.requests().size(), 1u);
  EXPECT_EQ(fingerprint(rec.requests()[0]), fingerprint(hello_request()));
  EXPECT_EQ(rec.embed_calls(), 1u);
  rec.clear();
  EXPECT_TRUE(rec.requests().empty());
}

TEST(RequestJson, UsesChatCompletionsShape) {
  const nlohmann::json j = hello_request();
  EXPECT_EQ(j["messages"][0]["role"], "system");
  EXPECT_EQ(j["messages"][1]["content"], "Say hello in Chinese.");
  EXPECT_EQ(j["max_tokens"], 512);
}

}  // namespace
}  // namespace mnemo
