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

#ifndef MNEMO_CONFIG_H_
#define MNEMO_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "mnemo/shift_engine.h"

namespace mnemo {

struct BackendConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string embedding_model;
  std::string api_key;
  double dialogue_temperature = kDialogueTemperature;
  int retries = 3;
  int backoff_ms = 500;
};

struct RankerConfig {
  double learning_rate = 0.5;
  int epochs = 200;
  std::uint64_t seed = 42;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
};

struct SessionConfig {
  RetrievalPolicy policy = RetrievalPolicy::kPerSession;
  int max_turns = kDefaultMaxTurns;
  bool run_to_cap = false;
};

struct PathsConfig {
  std::string store;
  std::string bundles;
  std::string models;
  std::string fixtures;
};

// Settings of the original LLM fine-tuning runs, kept for reference only;
// the linear ranker here does not read them.
struct FineTuneProvenance {
  int batch_size = 64;
  int epochs = 2;
  double peak_learning_rate = 2e-5;
  std::string schedule = "cosine";
};

struct Config {
  BackendConfig backend;
  RankerConfig ranker;
  SessionConfig session;
  PathsConfig paths;
  FineTuneProvenance provenance;

  // Flat JSON object with dotted keys, e.g. {"ranker.epochs": 200}. Unknown
  // keys are rejected. MNEMO_API_KEY, when set, overrides backend.api_key.
  static Config load(const std::filesystem::path& path);
  static Config from_flat_json(std::string_view json_text);

  // The flat key/value form (api key redacted).
  std::string to_flat_json() const;
};

// Throws kConfigError on an out-of-range value.
void validate(const Config& config);

// Short stable hash of the effective configuration, for run logs.
std::string config_hash(const Config& config);

void apply_api_key_env(Config& config);

}  // namespace mnemo

#endif  // MNEMO_CONFIG_H_
