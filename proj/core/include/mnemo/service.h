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

#ifndef MNEMO_SERVICE_H_
#define MNEMO_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"
#include "mnemo/ranker.h"
#include "mnemo/shift_engine.h"

namespace mnemo {

struct ServiceOptions {
  // Bundles addressable by id (their anchor id) in POST /sessions.
  std::map<std::string, HistoryBundle> bundles;
  RetrievalPolicy default_policy = RetrievalPolicy::kPerSession;
  int default_max_turns = kDefaultMaxTurns;
  EngineOptions engine;
  // When set, closed sessions are appended to this store file.
  std::optional<std::filesystem::path> snapshot_store;
  int retry_after_seconds = 5;
};

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
  std::map<std::string, std::string> headers;
};

// HTTP surface over ShiftEngine. Sessions live in memory; each is guarded by
// its own mutex so one request at a time mutates it, while distinct sessions
// proceed concurrently.
//
//   POST   /sessions                 {bundle_id | bundle, policy?, opening?, max_turns?, nonce?}
//   POST   /sessions/{id}/messages   {text, nonce?}
//   GET    /sessions/{id}
//   GET    /sessions/{id}/memory
//   DELETE /sessions/{id}
class Service {
 public:
  Service(const RankerModel& model, Backend& backend, ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-free dispatch; the HTTP server routes through here.
  ServiceResponse handle(const std::string& method, const std::string& path,
                         const std::string& body);

  // Binds and serves until stop(). Returns false if binding fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port and serves on a background thread; returns
  // the port.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mnemo

#endif  // MNEMO_SERVICE_H_
