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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// fails. Tolerances and time limits are fixed here on purpose.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "forge_backend.h"
#include "metric_oracle.h"
#include "mnemo/data_forge.h"
#include "mnemo/error.h"
#include "mnemo/eval.h"
#include "mnemo/memory_store.h"
#include "mnemo/mock_backend.h"
#include "mnemo/ranker.h"
#include "mnemo/service.h"
#include "mnemo/shift_engine.h"
#include "scripted_backend.h"
#include "separable.h"
#include "service_client.h"
#include "session_fixtures.h"
#include "temp_dir.h"
#include "turn_fixtures.h"

namespace {

using namespace mnemo;
using nlohmann::json;

constexpr double kMetricTol = 1e-12;
constexpr double kLn2Tol = 1e-9;
constexpr double kLossTol = 1e-6;
constexpr double kGradRelTol = 1e-6;
constexpr double kGradEps = 1e-5;
constexpr double kFrozenLossTol = 1e-9;
constexpr double kMinTrainedR1 = 0.95;
constexpr double kMinR1Gain = 0.2;

// Independent values: Python math module and tests/oracles/separable_reference.py.
constexpr double kLn2 = 0.6931471805599453;
constexpr double kSoftplusMinus2 = 0.1269280110429725;
constexpr double kSoftplusPlus2 = 2.1269280110429727;
constexpr double kSeparableFinalLoss = 0.017002311915;

// Collects failures for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) out += " (+" + std::to_string(count_ - failures_.size()) + ")";
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string num(double x) {
  std::ostringstream s;
  s.precision(12);
  s << x;
  return s.str();
}

// --- 1: metrics against the brute-force oracle ------------------------------
void metrics(Check& c) {
  std::mt19937_64 rng(2024);
  for (int set = 0; set < 200; ++set) {
    const auto scored = testing::random_scored_instances(rng, 1 + rng() % 50);
    std::vector<RankingInstance> instances;
    for (const auto& s : scored) {
      const auto order = order_by_score(s.scores);
      std::size_t pos = 0;
      while (order[pos].topic_index != s.truth) ++pos;
      instances.push_back({s.scores.size(), pos + 1});
    }
    const auto o = testing::oracle_metrics(scored);
    const std::string tag = "set " + std::to_string(set);
    c.expect(std::abs(recall_at_k(instances, 1) - o.r1) <= kMetricTol, tag + " R@1");
    c.expect(std::abs(recall_at_k(instances, 2) - o.r2) <= kMetricTol, tag + " R@2");
    c.expect(std::abs(recall_at_k(instances, 3) - o.r3) <= kMetricTol, tag + " R@3");
    c.expect(std::abs(mrr(instances) - o.mrr) <= kMetricTol, tag + " MRR");
    c.expect(std::abs(ndcg(instances) - o.ndcg) <= kMetricTol, tag + " NDCG");
  }
}

// --- 2: loss closed forms ----------------------------------------------------
RankerModel first_coordinate() {
  RankerModel m = RankerModel::zeros(1);
  m.theta[0] = 1.0;
  return m;
}

void loss_forms(Check& c) {
  const RankerModel m = first_coordinate();
  auto loss = [&](double rp, double rn) {
    const std::vector<PreferencePair> p = {{{rp, 0, 0}, {rn, 0, 0}}};
    return pairwise_loss(m, p);
  };
  c.expect(std::abs(loss(0.3, 0.3) - kLn2) <= kLn2Tol, "tie != ln 2: " + num(loss(0.3, 0.3)));
  c.expect(std::abs(loss(2, 0) - kSoftplusMinus2) <= kLossTol, "margin +2: " + num(loss(2, 0)));
  c.expect(std::abs(loss(0, 2) - kSoftplusPlus2) <= kLossTol, "margin -2: " + num(loss(0, 2)));
  c.expect(std::isfinite(loss(0, 1000)) && std::abs(loss(0, 1000) - 1000) <= kLossTol,
           "no overflow at margin -1000");
}

// --- 3: gradient against central differences ---------------------------------
void gradient(Check& c) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int draw = 0; draw < 100; ++draw) {
    RankerModel m = RankerModel::zeros(4);
    for (double& t : m.theta) t = u(rng);
    std::vector<PreferencePair> pair(1);
    pair[0].pos.resize(9);
    pair[0].neg.resize(9);
    for (auto& x : pair[0].pos) x = u(rng);
    for (auto& x : pair[0].neg) x = u(rng);
    const auto g = loss_gradient(m, pair);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < 9; ++j) {
      RankerModel hi = m, lo = m;
      hi.theta[j] += kGradEps;
      lo.theta[j] -= kGradEps;
      const double fd = (pairwise_loss(hi, pair) - pairwise_loss(lo, pair)) / (2 * kGradEps);
      diff += (g.theta[j] - fd) * (g.theta[j] - fd);
      norm += g.theta[j] * g.theta[j] + fd * fd;
    }
    const double rel = std::sqrt(diff) / std::max(std::sqrt(norm), 1e-300);
    c.expect(rel < kGradRelTol, "draw " + std::to_string(draw) + " rel " + num(rel));
  }
}

// --- 4: training on the separable benchmark ---------------------------------
void separable(Check& c) {
  const auto bench = testing::SeparableBenchmark::generate(42);
  const RankerModel m = train(bench.pairs, TrainOptions{});
  const double trained = recall_at_k(testing::rank_instances(m, bench), 1);
  const double zero = recall_at_k(
      testing::rank_instances(RankerModel::zeros(bench.direction.size() / 2), bench), 1);
  c.expect(m.train_meta.final_loss < 0.1, "loss " + num(m.train_meta.final_loss));
  c.expect(std::abs(m.train_meta.final_loss - kSeparableFinalLoss) <= kFrozenLossTol,
           "loss differs from reference descent: " + num(m.train_meta.final_loss));
  c.expect(trained >= kMinTrainedR1, "trained R@1 " + num(trained));
  c.expect(trained - zero >= kMinR1Gain, "gain over zero model " + num(trained - zero));
}

// --- 5: ranking is invariant under positive scaling -------------------------
void scaling(Check& c) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int inst = 0; inst < 50; ++inst) {
    RankerModel m = RankerModel::zeros(4);
    for (double& t : m.theta) t = u(rng);
    std::vector<FeatureVector> feats(10, FeatureVector(9));
    for (auto& f : feats) {
      for (auto& x : f) x = u(rng);
    }
    RankerModel scaled = m;
    const double factor = 1.0 + 9.0 * (u(rng) + 1.0);  // one positive c in [1, 19]
    for (double& t : scaled.theta) t *= factor;
    const auto a = rank_features(m, feats);
    const auto b = rank_features(scaled, feats);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].topic_index == b[i].topic_index;
    c.expect(same, "instance " + std::to_string(inst));
  }
}

// --- 6: scripted session and policy behaviour --------------------------------
class ScriptUser : public UserSource {
 public:
  explicit ScriptUser(std::vector<std::string> lines) : lines_(std::move(lines)) {}
  std::optional<std::string> next_user_utterance(const SessionState&) override {
    if (next_ >= lines_.size()) return std::nullopt;
    return lines_[next_++];
  }

 private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

std::vector<std::size_t> topic_per_turn(RetrievalPolicy policy) {
  auto replies = std::make_shared<int>(0);
  testing::ScriptedBackend backend(
      [replies](const GenerationRequest& r) -> std::string {
        if (testing::is_summary_request(r)) return "unused";
        return testing::turn_reply(false, "reply " + std::to_string((*replies)++));
      },
      3);
  backend.set_embedder([](const std::string& text) -> std::vector<double> {
    const auto nl = text.rfind('\n');
    const std::string last = nl == std::string::npos ? text : text.substr(nl + 1);
    if (last.find("hik") != std::string::npos) return {0.0, 1.0, 0.1};
    return {1.0, 0.0, 0.1};
  });
  RankerModel model = RankerModel::zeros(3);
  model.theta.back() = 1.0;
  HistoryBundle b;
  b.anchor_id = "piano";
  b.dialogues = {
      testing::make_dialogue("piano", Subject::kSkills, 5, "User is learning piano"),
      testing::make_dialogue("hike", Subject::kSocialEvents, 5, "User went hiking in the Alps")};
  ShiftEngine engine(model, backend);
  SessionState s = engine.open(b, {Utterance::user("I played piano today")}, policy);
  std::vector<std::size_t> out;
  engine.respond(s);
  out.push_back(s.retrieved->topic_index);
  for (const char* text : {"we went hiking last weekend", "the view was great"}) {
    engine.advance(s, text);
    out.push_back(s.retrieved->topic_index);
  }
  return out;
}

void session(Check& c) {
  const auto fx = testing::SessionFixture::load(testing::s1_dir());
  MockBackend mock(MockFixtures::load_dir(testing::s1_dir()));
  const RankerModel zero = RankerModel::zeros(kDefaultEmbeddingDim);
  ShiftEngine engine(zero, mock);
  ScriptUser u1(fx.user_script), u2(fx.user_script);
  const auto a = engine.run_session(fx.bundle, fx.opening, u1, RetrievalPolicy::kPerSession);
  const auto b = engine.run_session(fx.bundle, fx.opening, u2, RetrievalPolicy::kPerSession);
  c.expect(a.shift_turn == 3, "shift turn " +
                                  (a.shift_turn ? std::to_string(*a.shift_turn) : "none"));
  c.expect(a.transcript.size() == fx.opening.size() + 6,
           "transcript length " + std::to_string(a.transcript.size()));
  c.expect(json(a).dump() == json(b).dump(), "runs differ");
  c.expect(a.retrieved_topic && a.retrieved_topic->topic == "User is learning piano",
           "retrieved topic");
  const auto per_session = topic_per_turn(RetrievalPolicy::kPerSession);
  const auto per_utterance = topic_per_turn(RetrievalPolicy::kPerUtterance);
  c.expect(per_session == std::vector<std::size_t>{0, 0, 0}, "per_session topic moved");
  c.expect(per_utterance == std::vector<std::size_t>{0, 1, 0}, "per_utterance did not flip");
}

// --- 7: 40-dialogue forge run ------------------------------------------------
void forge(Check& c) {
  testing::ScriptedBackend backend(testing::forge_handler());
  const ForgeDataset data = Forge(backend, ForgePlan{}).run();
  c.expect(data.historical.size() + data.current.size() == 40,
           "total " + std::to_string(data.historical.size() + data.current.size()));
  std::map<Subject, int> per_subject;
  for (const auto& d : data.historical) {
    c.expect(d.turn_pairs() >= 5 && d.turn_pairs() <= 8, d.id + " exchanges");
    c.expect(d.topic.has_value(), d.id + " has no topic");
    ++per_subject[d.subject];
  }
  for (Subject s : kMemorableSubjects) {
    for (Subject g : kGeneralSubjects) {
      c.expect(per_subject[g] == 2 * per_subject[s], "memorable:general not 1:2");
    }
  }
  for (const auto& b : data.bundles) {
    c.expect(b.dialogues.size() >= 2 && b.dialogues.size() <= 11, b.anchor_id + " bundle size");
  }
  for (const auto& d : data.current) {
    std::size_t users = 0;
    for (const auto& t : d.turns) users += t.speaker == Speaker::kUser;
    c.expect(users <= 2 + 10, d.id + " over the turn cap");
  }
}

// --- 8: parser round trips and store persistence -----------------------------
void persistence(Check& c) {
  for (const auto& d : testing::well_formed_turns(100, 1)) {
    c.expect(parse_turn_output(format_turn_output(d)) == d, "round trip: " + d.response);
  }
  for (const auto& raw : testing::mutated_turns(testing::well_formed_turns(20, 2))) {
    try {
      parse_turn_output(raw);
      c.expect(false, "accepted mutation: " + raw);
    } catch (const Error& e) {
      c.expect(e.code() == Errc::kMalformedTurn, "wrong error for mutation");
    }
  }
  std::mt19937_64 rng(7);
  MemoryStore store;
  for (int i = 0; i < 1000; ++i) {
    Dialogue d = testing::make_dialogue("d" + std::to_string(i), static_cast<Subject>(rng() % 11),
                                        5 + static_cast<int>(rng() % 4),
                                        "topic " + std::to_string(i), static_cast<int>(rng() % 30));
    d.turns[1].thoughts = "reason " + std::to_string(i);
    d.turns[1].shift = rng() % 2 == 0;
    store.add(std::move(d));
  }
  testing::TempDir dir;
  store.save(dir / "store.jsonl");
  c.expect(MemoryStore::load(dir / "store.jsonl") == store, "store round trip differs");
}

// --- 9: service over HTTP matches the engine ---------------------------------
void service(Check& c) {
  const auto fx = testing::SessionFixture::load(testing::s1_dir());
  MockBackend mock(MockFixtures::load_dir(testing::s1_dir()));
  const RankerModel zero = RankerModel::zeros(kDefaultEmbeddingDim);
  ServiceOptions opts;
  opts.bundles.emplace(fx.bundle.anchor_id, fx.bundle);
  Service svc(zero, mock, opts);
  testing::ServiceClient client(svc.start_background());
  const auto created = client.post(
      "/sessions", json{{"bundle_id", fx.bundle.anchor_id}, {"opening", fx.opening}});
  c.expect(created.status == 201, "create status " + std::to_string(created.status));
  if (created.status != 201) return;
  const std::string id = created.body["session_id"];
  for (const auto& line : fx.user_script) {
    const auto r = client.post("/sessions/" + id + "/messages", json{{"text", line}});
    c.expect(r.status == 200, "message status " + std::to_string(r.status));
    c.expect(r.body["decision"].contains("thoughts") && r.body["decision"].contains("shift") &&
                 r.body["decision"].contains("response"),
             "decision triple");
    if (r.status != 200 || !r.body["shift_turn"].is_null()) break;
  }
  json via_http = client.get("/sessions/" + id).body;
  via_http.erase("session_id");

  ShiftEngine engine(zero, mock);
  SessionState s = engine.open(fx.bundle, fx.opening, RetrievalPolicy::kPerSession);
  for (const auto& line : fx.user_script) {
    engine.advance(s, line);
    if (s.shift_turn) break;
  }
  c.expect(via_http == json(s), "service state differs from direct engine drive");
  c.expect(client.post("/sessions/nope/messages", json{{"text", "x"}}).status == 404,
           "unknown session not 404");
  svc.stop();
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit
  std::function<void(Check&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "ranking metrics match brute-force oracle", 5, metrics},
      {2, "pairwise loss closed forms", 0, loss_forms},
      {3, "analytic gradient matches finite differences", 10, gradient},
      {4, "ranker learns separable benchmark", 30, separable},
      {5, "ranking invariant under positive scaling", 0, scaling},
      {6, "scripted session shifts at turn 3, policy flip", 0, session},
      {7, "40-dialogue forge honours corpus constraints", 10, forge},
      {8, "turn parser and store round trips", 0, persistence},
      {9, "HTTP service matches direct engine", 0, service},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_seconds > 0) {
      check.expect(secs <= cr.limit_seconds, "took " + num(secs) + " s");
    }
    std::printf("%s criterion %d: %s (%.3f s)%s%s\n", check.ok() ? "PASS" : "FAIL", cr.id,
                cr.name, secs, check.ok() ? "" : " -- ", check.summary().c_str());
    failed += !check.ok();
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
