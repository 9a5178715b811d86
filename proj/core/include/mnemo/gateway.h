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

#ifndef MNEMO_GATEWAY_H_
#define MNEMO_GATEWAY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mnemo {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role r);
Role role_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::kUser;
  std::string text;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// Sampling defaults: grading-style calls run cold, dialogue generation warm.
inline constexpr double kJudgeTemperature = 0.0;
inline constexpr double kDialogueTemperature = 0.7;

struct GenerationRequest {
  std::vector<ChatMessage> messages;
  double temperature = kJudgeTemperature;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;

  // Text of the last user message, or empty if there is none.
  std::string_view last_user_text() const;
};

// Throws kInvalidRequest: messages empty, first role not system/user,
// negative temperature or non-positive max_tokens.
void validate(const GenerationRequest& request);

// 16 hex digits. Depends only on roles, texts, temperature and max_tokens,
// and is identical across runs and platforms.
std::string fingerprint(const GenerationRequest& request);

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;
  // Unit-L2 copy. Throws kNonFinite when the norm is zero or not finite.
  EmbeddingVector normalized() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

// Offline embedding: character 3-grams (over code points, with begin/end
// markers) counted into `dim` buckets by a fixed 64-bit multiplicative hash,
// then L2-normalized.
EmbeddingVector hashed_embedding(std::string_view text,
                                 std::size_t dim = kDefaultEmbeddingDim);

// A chat-completion plus embedding provider. Implementations must be safe to
// call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed_texts(
      std::span<const std::string> texts) = 0;
};

// Validated entry points used by the rest of the library.
// chat: throws kEmptyCompletion on a blank completion.
std::string chat(Backend& backend, const GenerationRequest& request);
// embed: throws kInvalidRequest on a blank text; output is arity-preserving.
std::vector<EmbeddingVector> embed(Backend& backend,
                                   std::span<const std::string> texts);

void to_json(nlohmann::json& j, const GenerationRequest& r);

}  // namespace mnemo

#endif  // MNEMO_GATEWAY_H_
