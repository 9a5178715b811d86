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

#ifndef MNEMO_MOCK_BACKEND_H_
#define MNEMO_MOCK_BACKEND_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mnemo/gateway.h"

namespace mnemo {

// Content rule for the mock: every non-empty condition must hold.
struct MockRule {
  std::string last_user_contains;
  std::string system_contains;
  std::string any_contains;
  std::string reply;

  bool matches(const GenerationRequest& request) const;
};

struct MockFixtures {
  // fingerprint -> completion; consulted before the rules.
  std::map<std::string, std::string> responses;
  std::vector<MockRule> rules;
  // Exact-text embedding overrides; other texts use hashed_embedding.
  std::map<std::string, std::vector<double>> vectors;
  std::size_t embedding_dim = kDefaultEmbeddingDim;

  // Reads chat.json and, if present, embeddings.json from `dir`.
  //   chat.json:       {"responses": {fp: text}, "rules": [{"when": {...}, "reply": text}]}
  //   embeddings.json: {"dim": D, "vectors": {text: [..]}}
  static MockFixtures load_dir(const std::filesystem::path& dir);
};

// Deterministic offline backend. complete() is a pure function of the
// request content: fingerprint table, then rules in order, then the
// fallback "ECHO:" + last user text.
class MockBackend : public Backend {
 public:
  MockBackend() : MockBackend(MockFixtures{}) {}
  explicit MockBackend(MockFixtures fixtures);

  std::string complete(const GenerationRequest& request) override;
  std::vector<EmbeddingVector> embed_texts(
      std::span<const std::string> texts) override;

  std::size_t embedding_dim() const { return fixtures_->embedding_dim; }

 private:
  std::shared_ptr<const MockFixtures> fixtures_;
};

// Forwards to another backend and keeps a copy of every request.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(inner) {}

  std::string complete(const GenerationRequest& request) override;
  std::vector<EmbeddingVector> embed_texts(
      std::span<const std::string> texts) override;

  std::vector<GenerationRequest> requests() const;
  std::size_t embed_calls() const;
  void clear();

 private:
  Backend& inner_;
  mutable std::mutex mu_;
  std::vector<GenerationRequest> requests_;
  std::size_t embed_calls_ = 0;
};

}  // namespace mnemo

#endif  // MNEMO_MOCK_BACKEND_H_
