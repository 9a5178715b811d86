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

#include "mnemo/mock_backend.h"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"

namespace mnemo {

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, path.string() + ": " + e.what());
  }
}

bool contains(std::string_view haystack, const std::string& needle) {
  return needle.empty() || haystack.find(needle) != std::string_view::npos;
}

}  // namespace

bool MockRule::matches(const GenerationRequest& request) const {
  if (!contains(request.last_user_text(), last_user_contains)) return false;
  if (!system_contains.empty()) {
    bool hit = false;
    for (const auto& m : request.messages) {
      hit = hit || (m.role == Role::kSystem && contains(m.text, system_contains));
    }
    if (!hit) return false;
  }
  if (!any_contains.empty()) {
    bool hit = false;
    for (const auto& m : request.messages) hit = hit || contains(m.text, any_contains);
    if (!hit) return false;
  }
  return true;
}

namespace {

// Typos in a fixture file should fail loudly, not silently match nothing.
void only_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  if (!j.is_object()) throw Error(Errc::kParseError, where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw Error(Errc::kParseError, where + ": unknown key '" + key + "'");
  }
}

}  // namespace

MockFixtures MockFixtures::load_dir(const std::filesystem::path& dir) {
  MockFixtures fx;
  const auto chat_path = dir / "chat.json";
  if (std::filesystem::exists(chat_path)) {
    const auto j = read_json_file(chat_path);
    only_keys(j, {"responses", "rules"}, chat_path.string());
    try {
      if (j.contains("responses")) {
        fx.responses = j.at("responses").get<std::map<std::string, std::string>>();
      }
      for (const auto& r : j.value("rules", nlohmann::json::array())) {
        MockRule rule;
        only_keys(r, {"when", "reply"}, chat_path.string());
        const auto& when = r.value("when", nlohmann::json::object());
        only_keys(when, {"last_user_contains", "system_contains", "any_contains"},
                  chat_path.string());
        rule.last_user_contains = when.value("last_user_contains", "");
        rule.system_contains = when.value("system_contains", "");
        rule.any_contains = when.value("any_contains", "");
        rule.reply = r.at("reply").get<std::string>();
        fx.rules.push_back(std::move(rule));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, chat_path.string() + ": " + e.what());
    }
  }
  const auto emb_path = dir / "embeddings.json";
  if (std::filesystem::exists(emb_path)) {
    const auto j = read_json_file(emb_path);
    try {
      fx.embedding_dim = j.value("dim", kDefaultEmbeddingDim);
      if (j.contains("vectors")) {
        fx.vectors = j.at("vectors").get<std::map<std::string, std::vector<double>>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, emb_path.string() + ": " + e.what());
    }
    for (const auto& [text, v] : fx.vectors) {
      if (v.size() != fx.embedding_dim) {
        throw Error(Errc::kDimMismatch, "embedding override for '" + text + "'");
      }
    }
  }
  return fx;
}

MockBackend::MockBackend(MockFixtures fixtures)
    : fixtures_(std::make_shared<const MockFixtures>(std::move(fixtures))) {}

std::string MockBackend::complete(const GenerationRequest& request) {
  if (!fixtures_->responses.empty()) {
    auto it = fixtures_->responses.find(fingerprint(request));
    if (it != fixtures_->responses.end()) return it->second;
  }
  for (const auto& rule : fixtures_->rules) {
    if (rule.matches(request)) return rule.reply;
  }
  return "ECHO:" + std::string(request.last_user_text());
}

std::vector<EmbeddingVector> MockBackend::embed_texts(
    std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = fixtures_->vectors.find(t);
    if (it != fixtures_->vectors.end()) {
      out.push_back(EmbeddingVector(it->second).normalized());
    } else {
      out.push_back(hashed_embedding(t, fixtures_->embedding_dim));
    }
  }
  return out;
}

std::string RecordingBackend::complete(const GenerationRequest& request) {
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
  }
  return inner_.complete(request);
}

std::vector<EmbeddingVector> RecordingBackend::embed_texts(
    std::span<const std::string> texts) {
  {
    std::lock_guard lock(mu_);
    ++embed_calls_;
  }
  return inner_.embed_texts(texts);
}

std::vector<GenerationRequest> RecordingBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t RecordingBackend::embed_calls() const {
  std::lock_guard lock(mu_);
  return embed_calls_;
}

void RecordingBackend::clear() {
  std::lock_guard lock(mu_);
  requests_.clear();
  embed_calls_ = 0;
}

}  // namespace mnemo
