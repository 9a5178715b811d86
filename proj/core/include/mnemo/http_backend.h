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

#ifndef MNEMO_HTTP_BACKEND_H_
#define MNEMO_HTTP_BACKEND_H_

#include <chrono>
#include <string>

#include "mnemo/gateway.h"

namespace mnemo {

struct HttpBackendOptions {
  // Base URL up to and including the API version, e.g.
  // "https://api.example.com/v1". "/chat/completions" and "/embeddings"
  // are appended.
  std::string endpoint_url;
  std::string model;
  std::string embedding_model;
  std::string api_key;
  int retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{60};
};

// Client for the common chat-completions wire protocol. Transport errors,
// 429 and 5xx responses are retried with exponential backoff; after the last
// retry the call fails with kBackendUnavailable.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string complete(const GenerationRequest& request) override;
  std::vector<EmbeddingVector> embed_texts(
      std::span<const std::string> texts) override;

 private:
  std::string post(const std::string& path, const std::string& body);

  HttpBackendOptions options_;
  std::string origin_;     // scheme://host[:port]
  std::string base_path_;  // e.g. /v1
};

}  // namespace mnemo

#endif  // MNEMO_HTTP_BACKEND_H_
