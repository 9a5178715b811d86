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

#ifndef MNEMO_TESTS_SCRIPTED_BACKEND_H_
#define MNEMO_TESTS_SCRIPTED_BACKEND_H_

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"

namespace mnemo::testing {

// Backend whose completions come from a callback and whose embeddings come
// from an exact-text table, falling back to hashed_embedding.
class ScriptedBackend : public Backend {
 public:
  using Handler = std::function<std::string(const GenerationRequest&)>;

  explicit ScriptedBackend(Handler handler, std::size_t dim = kDefaultEmbeddingDim)
      : handler_(std::move(handler)), dim_(dim) {}

  std::string complete(const GenerationRequest& request) override;
  std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts) override;

  using Embedder = std::function<std::vector<double>(const std::string&)>;

  void set_vector(const std::string& text, std::vector<double> v) { vectors_[text] = std::move(v); }
  // Consulted after the exact-text table and before the hashed fallback.
  void set_embedder(Embedder e) { embedder_ = std::move(e); }
  std::vector<GenerationRequest> requests() const;

 private:
  Handler handler_;
  std::size_t dim_;
  std::map<std::string, std::vector<double>> vectors_;
  Embedder embedder_;
  mutable std::mutex mu_;
  std::vector<GenerationRequest> requests_;
};

// Handler popping replies off a queue; throws once the queue is empty.
ScriptedBackend::Handler queue_handler(std::deque<std::string> replies);

bool is_summary_request(const GenerationRequest& r);
bool is_shift_request(const GenerationRequest& r);
bool is_user_turn_request(const GenerationRequest& r);

std::string turn_reply(bool shift, const std::string& response,
                       const std::string& thoughts = "checking the context");

// n-exchange dialogue with distinct, readable lines.
Dialogue make_dialogue(const std::string& id, Subject subject, int pairs,
                       std::optional<std::string> topic = std::nullopt, int day_offset = 0);

// Anchor `anchor_id` (memorable) followed by `extra` general dialogues.
HistoryBundle make_bundle(const std::string& anchor_id, int extra, bool with_topics = true);

}  // namespace mnemo::testing

#endif  // MNEMO_TESTS_SCRIPTED_BACKEND_H_
