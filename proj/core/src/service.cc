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

#include "mnemo/service.h"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "mnemo/error.h"

namespace mnemo {

namespace {

using nlohmann::json;

struct Session {
  std::mutex mu;
  SessionState state;
  std::map<std::string, ServiceResponse> by_nonce;
};

ServiceResponse reply(int status, const json& body) {
  return ServiceResponse{status, body.dump(), {}};
}

ServiceResponse error_reply(int status, std::string_view code, const std::string& message) {
  return reply(status, json{{"error", code}, {"message", message}});
}

int status_for(Errc code) {
  switch (code) {
    case Errc::kNotFound:
      return 404;
    case Errc::kMaxTurnsExceeded:
    case Errc::kPreconditionViolation:
      return 409;
    case Errc::kBackendUnavailable:
    case Errc::kEmptyCompletion:
    case Errc::kMalformedTurn:
      return 502;
    case Errc::kParseError:
    case Errc::kInvalidDialogue:
    case Errc::kConfigError:
    case Errc::kRangeError:
    case Errc::kMissingMemory:
      return 400;
    default:
      return 500;
  }
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    auto end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    if (end > start) parts.push_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

json parse_body(const std::string& body) {
  json j;
  try {
    j = body.empty() ? json::object() : json::parse(body);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, std::string("malformed JSON body: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::kParseError, "body must be a JSON object");
  return j;
}

json ranking_json(const SessionState& s) {
  json out = json::array();
  for (std::size_t r = 0; r < s.ranking.size(); ++r) {
    const auto& c = s.ranking[r];
    const auto& t = s.topics.at(c.topic_index);
    out.push_back({{"rank", r + 1},
                   {"topic_index", c.topic_index},
                   {"dialogue_id", t.dialogue_id},
                   {"topic", t.topic},
                   {"score", c.score}});
  }
  return out;
}

json topic_json(const SessionState& s) {
  const TopicEntry* t = s.retrieved_topic();
  return t ? json(*t) : json(nullptr);
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

struct Service::Impl {
  Impl(const RankerModel& model, Backend& backend, ServiceOptions opts)
      : options(std::move(opts)), engine(model, backend, options.engine) {}

  ServiceOptions options;
  ShiftEngine engine;

  std::mutex registry_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::map<std::string, ServiceResponse> create_by_nonce;
  std::uint64_t next_id = 1;

  httplib::Server server;
  std::thread worker;

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(registry_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(Errc::kNotFound, "no session '" + id + "'");
    return it->second;
  }

  ServiceResponse create(const std::string& body) {
    const json j = parse_body(body);
    const std::string nonce = j.value("nonce", "");
    if (!nonce.empty()) {
      std::lock_guard lock(registry_mu);
      if (auto it = create_by_nonce.find(nonce); it != create_by_nonce.end()) return it->second;
    }

    HistoryBundle bundle;
    std::vector<Utterance> opening;
    RetrievalPolicy policy = options.default_policy;
    int max_turns = options.default_max_turns;
    try {
      if (j.contains("bundle")) {
        bundle = j.at("bundle").get<HistoryBundle>();
      } else if (j.contains("bundle_id")) {
        const auto id = j.at("bundle_id").get<std::string>();
        auto it = options.bundles.find(id);
        if (it == options.bundles.end()) throw Error(Errc::kNotFound, "no bundle '" + id + "'");
        bundle = it->second;
      } else {
        throw Error(Errc::kParseError, "body needs 'bundle_id' or 'bundle'");
      }
      if (j.contains("policy")) policy = policy_from_string(j.at("policy").get<std::string>());
      if (j.contains("opening")) opening = j.at("opening").get<std::vector<Utterance>>();
      if (j.contains("max_turns")) max_turns = j.at("max_turns").get<int>();
    } catch (const json::exception& e) {
      throw Error(Errc::kParseError, e.what());
    }

    auto session = std::make_shared<Session>();
    session->state = engine.open(std::move(bundle), std::move(opening), policy, max_turns);
    std::optional<TurnDecision> first;
    if (!session->state.transcript.empty() &&
        session->state.transcript.back().speaker == Speaker::kUser) {
      first = engine.respond(session->state);
    }

    std::lock_guard lock(registry_mu);
    const std::string id = "s" + std::to_string(next_id++);
    const auto& s = session->state;
    json out{{"session_id", id},
             {"retrieved_topic", topic_json(s)},
             {"scores", ranking_json(s)},
             {"policy", to_string(s.policy)},
             {"turn_counter", s.turn_counter},
             {"max_turns", s.max_turns},
             {"shift_turn", optional_int(s.shift_turn)}};
    if (first) out["decision"] = *first;
    sessions.emplace(id, std::move(session));
    ServiceResponse r = reply(201, out);
    if (!nonce.empty()) create_by_nonce.emplace(nonce, r);
    return r;
  }

  ServiceResponse message(const std::string& id, const std::string& body) {
    auto session = find(id);
    const json j = parse_body(body);
    std::string text;
    std::string nonce;
    try {
      text = j.at("text").get<std::string>();
      nonce = j.value("nonce", "");
    } catch (const json::exception& e) {
      throw Error(Errc::kParseError, std::string("body needs string 'text': ") + e.what());
    }

    std::lock_guard lock(session->mu);
    if (!nonce.empty()) {
      if (auto it = session->by_nonce.find(nonce); it != session->by_nonce.end()) {
        return it->second;
      }
    }
    SessionState next = session->state;
    const TurnDecision d = engine.advance(next, text);
    session->state = std::move(next);
    const auto& s = session->state;
    ServiceResponse r = reply(200, json{{"decision", d},
                                        {"shift_turn", optional_int(s.shift_turn)},
                                        {"retrieved_topic", topic_json(s)},
                                        {"turn_counter", s.turn_counter},
                                        {"max_turns", s.max_turns}});
    if (!nonce.empty()) session->by_nonce.emplace(nonce, r);
    return r;
  }

  ServiceResponse state(const std::string& id) {
    auto session = find(id);
    std::lock_guard lock(session->mu);
    json out = session->state;
    out["session_id"] = id;
    return reply(200, out);
  }

  ServiceResponse memory(const std::string& id) {
    auto session = find(id);
    std::lock_guard lock(session->mu);
    const auto& s = session->state;
    return reply(200, json{{"session_id", id},
                           {"policy", to_string(s.policy)},
                           {"retrieved_topic", topic_json(s)},
                           {"topics", ranking_json(s)}});
  }

  ServiceResponse close(const std::string& id) {
    std::shared_ptr<Session> session;
    {
      std::lock_guard lock(registry_mu);
      auto it = sessions.find(id);
      if (it == sessions.end()) throw Error(Errc::kNotFound, "no session '" + id + "'");
      session = it->second;
      sessions.erase(it);
    }
    std::lock_guard lock(session->mu);
    bool saved = false;
    if (options.snapshot_store && !session->state.transcript.empty()) {
      const Dialogue& anchor = session->state.bundle.anchor();
      Dialogue d;
      d.id = "session-" + id + "-" + anchor.id;
      d.kind = anchor.kind;
      d.subject = anchor.subject;
      if (const TopicEntry* t = session->state.retrieved_topic()) d.topic = t->topic;
      d.turns = session->state.transcript;
      std::ofstream out(*options.snapshot_store, std::ios::binary | std::ios::app);
      if (!out) throw Error(Errc::kIoError, "cannot append to snapshot store");
      out << json(d).dump() << '\n';
      saved = true;
    }
    return reply(200, json{{"session_id", id}, {"closed", true}, {"snapshot", saved}});
  }

  ServiceResponse route(const std::string& method, const std::string& path,
                        const std::string& body) {
    const auto parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions") {
      return error_reply(404, "NotFound", "no route " + path);
    }
    if (parts.size() == 1 && method == "POST") return create(body);
    if (parts.size() == 2 && method == "GET") return state(parts[1]);
    if (parts.size() == 2 && method == "DELETE") return close(parts[1]);
    if (parts.size() == 3 && parts[2] == "messages" && method == "POST") {
      return message(parts[1], body);
    }
    if (parts.size() == 3 && parts[2] == "memory" && method == "GET") return memory(parts[1]);
    return error_reply(405, "MethodNotAllowed", method + " " + path);
  }
};

Service::Service(const RankerModel& model, Backend& backend, ServiceOptions options)
    : impl_(std::make_unique<Impl>(model, backend, std::move(options))) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ServiceResponse r = handle(req.method, req.path, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  auto& srv = impl_->server;
  srv.Get(".*", handler);
  srv.Post(".*", handler);
  srv.Delete(".*", handler);
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

Service::~Service() { stop(); }

ServiceResponse Service::handle(const std::string& method, const std::string& path,
                                const std::string& body) {
  try {
    return impl_->route(method, path, body);
  } catch (const Error& e) {
    ServiceResponse r = error_reply(status_for(e.code()), errc_name(e.code()), e.what());
    if (r.status == 502) {
      r.headers["Retry-After"] = std::to_string(impl_->options.retry_after_seconds);
    }
    return r;
  } catch (const std::exception& e) {
    return error_reply(500, "Internal", e.what());
  }
}

bool Service::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int Service::start_background(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port <= 0) throw Error(Errc::kIoError, "cannot bind " + host);
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace mnemo
