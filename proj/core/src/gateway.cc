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

#include <bit>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

class Fnv1a {
 public:
  void bytes(std::string_view s) {
    for (char c : s) {
      state_ ^= static_cast<unsigned char>(c);
      state_ *= kFnvPrime;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xFF;
      state_ *= kFnvPrime;
    }
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = kFnvOffset;
};

// Final avalanche from splitmix64 so nearby inputs land far apart.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr char32_t kBeginMarker = 0x02;
constexpr char32_t kEndMarker = 0x03;

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::kSystem;
  if (s == "user") return Role::kUser;
  if (s == "assistant") return Role::kAssistant;
  throw Error(Errc::kParseError, "unknown role '" + std::string(s) + "'");
}

std::string_view GenerationRequest::last_user_text() const {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::kUser) return it->text;
  }
  return {};
}

void validate(const GenerationRequest& request) {
  if (request.messages.empty()) {
    throw Error(Errc::kInvalidRequest, "request has no messages");
  }
  if (request.messages.front().role == Role::kAssistant) {
    throw Error(Errc::kInvalidRequest, "first message must be system or user");
  }
  if (!(request.temperature >= 0.0) || !std::isfinite(request.temperature)) {
    throw Error(Errc::kInvalidRequest, "temperature must be >= 0");
  }
  if (request.max_tokens <= 0) {
    throw Error(Errc::kInvalidRequest, "max_tokens must be > 0");
  }
}

std::string fingerprint(const GenerationRequest& request) {
  validate(request);
  // Length-prefixed encoding keeps message boundaries unambiguous.
  Fnv1a h;
  h.u64(request.messages.size());
  for (const auto& m : request.messages) {
    h.u64(static_cast<std::uint64_t>(m.role));
    h.u64(m.text.size());
    h.bytes(m.text);
  }
  h.u64(std::bit_cast<std::uint64_t>(request.temperature));
  h.u64(static_cast<std::uint64_t>(request.max_tokens));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(mix(h.value())));
  return buf;
}

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : values_(std::move(values)) {}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(Errc::kNonFinite, "cannot normalize a zero or non-finite vector");
  }
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] / n;
  return EmbeddingVector(std::move(out));
}

EmbeddingVector hashed_embedding(std::string_view text, std::size_t dim) {
  if (dim == 0) throw Error(Errc::kInvalidRequest, "embedding dim must be > 0");
  if (text::is_blank(text)) throw Error(Errc::kInvalidRequest, "blank text");
  std::u32string cps = text::decode_utf8(text);
  cps.insert(cps.begin(), kBeginMarker);
  cps.push_back(kEndMarker);
  std::vector<double> counts(dim, 0.0);
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    std::uint64_t h = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      h = (h ^ static_cast<std::uint64_t>(cps[i + k])) * kGoldenGamma;
      h ^= h >> 29;
    }
    counts[(h >> 32) % dim] += 1.0;
  }
  return EmbeddingVector(std::move(counts)).normalized();
}

std::string chat(Backend& backend, const GenerationRequest& request) {
  validate(request);
  std::string out = backend.complete(request);
  if (text::is_blank(out)) throw Error(Errc::kEmptyCompletion, "blank completion");
  return out;
}

std::vector<EmbeddingVector> embed(Backend& backend,
                                   std::span<const std::string> texts) {
  for (const auto& t : texts) {
    if (text::is_blank(t)) throw Error(Errc::kInvalidRequest, "cannot embed blank text");
  }
  auto out = backend.embed_texts(texts);
  if (out.size() != texts.size()) {
    throw Error(Errc::kBackendUnavailable, "embedding arity mismatch");
  }
  return out;
}

void to_json(nlohmann::json& j, const GenerationRequest& r) {
  auto messages = nlohmann::json::array();
  for (const auto& m : r.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
  }
  j = nlohmann::json{{"messages", std::move(messages)},
                     {"temperature", r.temperature},
                     {"max_tokens", r.max_tokens}};
  if (r.seed) j["seed"] = *r.seed;
}

}  // namespace mnemo
