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

#include "mnemo/config.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"

namespace mnemo {

namespace {

Error config_error(const std::string& what) { return Error(Errc::kConfigError, what); }

template <typename T>
T read(const nlohmann::json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw config_error("wrong type for '" + key + "'");
  }
}

}  // namespace

Config Config::from_flat_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(e.what());
  }
  if (!j.is_object()) throw config_error("config must be a flat object");

  Config c;
  for (const auto& [key, v] : j.items()) {
    if (key == "backend.endpoint_url") c.backend.endpoint_url = read<std::string>(v, key);
    else if (key == "backend.model_name") c.backend.model_name = read<std::string>(v, key);
    else if (key == "backend.embedding_model") c.backend.embedding_model = read<std::string>(v, key);
    else if (key == "backend.api_key") c.backend.api_key = read<std::string>(v, key);
    else if (key == "backend.dialogue_temperature") c.backend.dialogue_temperature = read<double>(v, key);
    else if (key == "backend.retries") c.backend.retries = read<int>(v, key);
    else if (key == "backend.backoff_ms") c.backend.backoff_ms = read<int>(v, key);
    else if (key == "ranker.learning_rate") c.ranker.learning_rate = read<double>(v, key);
    else if (key == "ranker.epochs") c.ranker.epochs = read<int>(v, key);
    else if (key == "ranker.seed") c.ranker.seed = read<std::uint64_t>(v, key);
    else if (key == "ranker.embedding_dim") c.ranker.embedding_dim = read<std::size_t>(v, key);
    else if (key == "session.policy") c.session.policy = policy_from_string(read<std::string>(v, key));
    else if (key == "session.max_turns") c.session.max_turns = read<int>(v, key);
    else if (key == "session.run_to_cap") c.session.run_to_cap = read<bool>(v, key);
    else if (key == "paths.store") c.paths.store = read<std::string>(v, key);
    else if (key == "paths.bundles") c.paths.bundles = read<std::string>(v, key);
    else if (key == "paths.models") c.paths.models = read<std::string>(v, key);
    else if (key == "paths.fixtures") c.paths.fixtures = read<std::string>(v, key);
    else throw config_error("unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Config c = from_flat_json(ss.str());
  apply_api_key_env(c);
  return c;
}

void apply_api_key_env(Config& config) {
  if (const char* key = std::getenv("MNEMO_API_KEY"); key != nullptr && *key != '\0') {
    config.backend.api_key = key;
  }
}

std::string Config::to_flat_json() const {
  nlohmann::json j{
      {"backend.endpoint_url", backend.endpoint_url},
      {"backend.model_name", backend.model_name},
      {"backend.embedding_model", backend.embedding_model},
      {"backend.api_key", backend.api_key.empty() ? "" : "<redacted>"},
      {"backend.dialogue_temperature", backend.dialogue_temperature},
      {"backend.retries", backend.retries},
      {"backend.backoff_ms", backend.backoff_ms},
      {"ranker.learning_rate", ranker.learning_rate},
      {"ranker.epochs", ranker.epochs},
      {"ranker.seed", ranker.seed},
      {"ranker.embedding_dim", ranker.embedding_dim},
      {"session.policy", to_string(session.policy)},
      {"session.max_turns", session.max_turns},
      {"session.run_to_cap", session.run_to_cap},
      {"paths.store", paths.store},
      {"paths.bundles", paths.bundles},
      {"paths.models", paths.models},
      {"paths.fixtures", paths.fixtures}};
  return j.dump();
}

void validate(const Config& c) {
  if (!(c.backend.dialogue_temperature >= 0.0 && c.backend.dialogue_temperature <= 2.0)) {
    throw config_error("backend.dialogue_temperature must lie within [0, 2]");
  }
  if (c.backend.retries < 0 || c.backend.retries > 10) {
    throw config_error("backend.retries must lie within 0..10");
  }
  if (c.backend.backoff_ms < 0) throw config_error("backend.backoff_ms must be >= 0");
  if (!(c.ranker.learning_rate > 0.0)) throw config_error("ranker.learning_rate must be > 0");
  if (c.ranker.epochs < 1) throw config_error("ranker.epochs must be >= 1");
  if (c.ranker.embedding_dim < 1) throw config_error("ranker.embedding_dim must be >= 1");
  if (c.session.max_turns < 1 || c.session.max_turns > 100) {
    throw config_error("session.max_turns must lie within 1..100");
  }
}

std::string config_hash(const Config& config) {
  GenerationRequest carrier;
  carrier.messages.push_back({Role::kSystem, config.to_flat_json()});
  return fingerprint(carrier);
}

}  // namespace mnemo
