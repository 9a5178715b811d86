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

#include "mnemo/http_backend.h"

#include <thread>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "mnemo/error.h"

namespace mnemo {

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const std::string& url = options_.endpoint_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::kConfigError, "endpoint_url needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  if (options_.retries < 0) throw Error(Errc::kConfigError, "retries must be >= 0");
}

std::string HttpBackend::post(const std::string& path, const std::string& body) {
  httplib::Client client(origin_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  std::string last_failure;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(base_path_ + path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    last_failure = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) break;
  }
  throw Error(Errc::kBackendUnavailable, origin_ + base_path_ + path + " " + last_failure);
}

std::string HttpBackend::complete(const GenerationRequest& request) {
  nlohmann::json body = request;
  body["model"] = options_.model;
  const std::string raw = post("/chat/completions", body.dump());
  try {
    const auto j = nlohmann::json::parse(raw);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kBackendUnavailable, std::string("bad completion payload: ") + e.what());
  }
}

std::vector<EmbeddingVector> HttpBackend::embed_texts(
    std::span<const std::string> texts) {
  nlohmann::json body{{"model", options_.embedding_model},
                      {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string raw = post("/embeddings", body.dump());
  try {
    const auto j = nlohmann::json::parse(raw);
    const auto& data = j.at("data");
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> seen(texts.size(), false);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data.at(i);
      const std::size_t index = item.value("index", i);
      if (index >= out.size() || seen[index]) {
        throw Error(Errc::kBackendUnavailable, "embedding index out of range");
      }
      out[index] = EmbeddingVector(item.at("embedding").get<std::vector<double>>());
      seen[index] = true;
    }
    for (bool s : seen) {
      if (!s) throw Error(Errc::kBackendUnavailable, "missing embedding in response");
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kBackendUnavailable, std::string("bad embedding payload: ") + e.what());
  }
}

}  // namespace mnemo
