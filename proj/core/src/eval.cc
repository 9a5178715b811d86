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

#include "mnemo/eval.h"

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "jsonl.h"
#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

void check(std::span<const RankingInstance> instances) {
  if (instances.empty()) throw Error(Errc::kEmptySet, "no ranking instances");
  for (const auto& in : instances) {
    if (in.truth_rank < 1 || in.truth_rank > in.candidate_count) {
      throw Error(Errc::kRangeError, "truth_rank " + std::to_string(in.truth_rank) +
                                         " outside [1, " +
                                         std::to_string(in.candidate_count) + "]");
    }
  }
}

template <typename Fn>
double mean_of(std::span<const RankingInstance> instances, Fn&& per_instance) {
  check(instances);
  double total = 0.0;
  for (const auto& in : instances) total += per_instance(in);
  return total / static_cast<double>(instances.size());
}

std::vector<Utterance> parse_context(const nlohmann::json& j) {
  std::vector<Utterance> out;
  const std::size_t n = j.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& item = j.at(i);
    if (item.is_string()) {
      // Alternate backwards from a final user utterance.
      const bool user = (n - 1 - i) % 2 == 0;
      out.push_back(user ? Utterance::user(item.get<std::string>())
                         : Utterance::bot(item.get<std::string>()));
    } else {
      out.push_back(item.get<Utterance>());
    }
  }
  return out;
}

}  // namespace

double recall_at_k(std::span<const RankingInstance> instances, std::size_t k) {
  if (k < 1) throw Error(Errc::kRangeError, "k must be >= 1");
  return mean_of(instances, [k](const RankingInstance& in) {
    return in.truth_rank <= k ? 1.0 : 0.0;
  });
}

double mrr(std::span<const RankingInstance> instances) {
  return mean_of(instances, [](const RankingInstance& in) {
    return 1.0 / static_cast<double>(in.truth_rank);
  });
}

double ndcg(std::span<const RankingInstance> instances) {
  return mean_of(instances, [](const RankingInstance& in) {
    return 1.0 / std::log2(static_cast<double>(in.truth_rank) + 1.0);
  });
}

SessionStats session_stats(std::span<const std::optional<int>> shift_turns) {
  if (shift_turns.empty()) throw Error(Errc::kEmptySet, "no sessions");
  SessionStats s;
  s.sessions = shift_turns.size();
  double sum = 0.0;
  std::size_t achieved = 0;
  for (const auto& t : shift_turns) {
    if (t) {
      ++achieved;
      sum += *t;
    } else {
      ++s.no_shift_count;
    }
  }
  s.achievement_rate = static_cast<double>(achieved) / static_cast<double>(s.sessions);
  if (achieved > 0) s.avg_shift_turn = sum / static_cast<double>(achieved);
  return s;
}

SessionStats session_stats(std::span<const SessionOutcome> outcomes) {
  std::vector<std::optional<int>> turns;
  turns.reserve(outcomes.size());
  for (const auto& o : outcomes) turns.push_back(o.shift_turn);
  return session_stats(turns);
}

EvalReport report_from_instances(std::span<const RankingInstance> instances) {
  EvalReport r;
  for (std::size_t k : {1, 2, 3}) r.r_at[k] = recall_at_k(instances, k);
  r.mrr = mrr(instances);
  r.ndcg = ndcg(instances);
  r.n = instances.size();
  return r;
}

std::vector<RetrievalCase> load_testset(const std::filesystem::path& path) {
  std::vector<RetrievalCase> cases;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) {
    for (const auto& item : j.items()) {
      const auto& k = item.key();
      if (k != "context" && k != "candidates" && k != "truth_index" &&
          k != "alt_truth_index") {
        throw Error(Errc::kParseError, "unknown field '" + k + "' in test case");
      }
    }
    RetrievalCase c;
    c.context = parse_context(j.at("context"));
    c.candidates = j.at("candidates").get<std::vector<std::string>>();
    c.truth_index = j.at("truth_index").get<std::size_t>();
    if (auto it = j.find("alt_truth_index"); it != j.end() && !it->is_null()) {
      c.alt_truth_index = it->get<std::size_t>();
    }
    cases.push_back(std::move(c));
  });
  return cases;
}

void save_testset(std::span<const RetrievalCase> cases, const std::filesystem::path& path) {
  auto out = detail::open_for_write(path);
  for (const auto& c : cases) {
    nlohmann::json j{{"context", c.context},
                     {"candidates", c.candidates},
                     {"truth_index", c.truth_index}};
    if (c.alt_truth_index) j["alt_truth_index"] = *c.alt_truth_index;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

EvalReport evaluate_retrieval(const RankerModel& model, std::span<const RetrievalCase> cases,
                              Backend& backend, const EvalOptions& options) {
  if (cases.empty()) throw Error(Errc::kEmptySet, "empty test set");
  std::vector<RankingInstance> instances;
  instances.reserve(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const std::string where = "case " + std::to_string(i + 1);
    if (c.candidates.empty() ||
        (!options.allow_n && c.candidates.size() != kEvalCandidates)) {
      throw Error(Errc::kShapeError, where + " has " + std::to_string(c.candidates.size()) +
                                         " candidates, expected 10");
    }
    std::size_t truth = c.truth_index;
    if (options.use_alt_truth) {
      if (!c.alt_truth_index) throw Error(Errc::kShapeError, where + " lacks alt_truth_index");
      truth = *c.alt_truth_index;
    }
    if (truth >= c.candidates.size()) {
      throw Error(Errc::kShapeError, where + " truth index out of range");
    }
    std::vector<TopicEntry> topics;
    topics.reserve(c.candidates.size());
    for (std::size_t t = 0; t < c.candidates.size(); ++t) {
      topics.push_back({"candidate-" + std::to_string(t), c.candidates[t],
                        TopicSource::kProvided});
    }
    const auto ranked = rank(model, ContextWindow::tail_of(c.context), topics, backend);
    std::size_t position = 0;
    while (ranked[position].topic_index != truth) ++position;
    instances.push_back({c.candidates.size(), position + 1});
  }
  return report_from_instances(instances);
}

std::string simulate_user(const HistoryBundle& persona, std::span<const Utterance> transcript,
                          Backend& backend) {
  if (transcript.empty() || transcript.back().speaker != Speaker::kBot) {
    throw Error(Errc::kPreconditionViolation, "user simulator needs a bot turn to answer");
  }
  std::string out = clean_user_utterance(chat(backend, user_turn_request(&persona, transcript)));
  if (out.empty()) throw Error(Errc::kEmptyCompletion, "simulated user said nothing");
  return out;
}

std::optional<std::string> SimulatedUser::next_user_utterance(const SessionState& state) {
  return simulate_user(persona_, state.transcript, backend_);
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) {
    Annotation a;
    a.session_id = j.at("session_id").get<std::string>();
    a.engagingness = j.at("engagingness").get<std::vector<int>>();
    a.overall_quality = j.at("overall_quality").get<std::vector<int>>();
    a.achievement = j.at("achievement").get<int>();
    a.turn = j.at("turn").get<int>();
    if (a.achievement < 0 || a.achievement > 2) {
      throw Error(Errc::kParseError, "achievement must be 0, 1 or 2");
    }
    if (a.turn < 0 || a.turn > kDefaultMaxTurns) {
      throw Error(Errc::kParseError, "turn must lie within 0..10");
    }
    out.push_back(std::move(a));
  });
  return out;
}

double cohens_kappa(std::span<const int> rater_a, std::span<const int> rater_b) {
  if (rater_a.size() != rater_b.size()) throw Error(Errc::kShapeError, "rater lengths differ");
  if (rater_a.empty()) throw Error(Errc::kEmptySet, "no ratings");
  const double n = static_cast<double>(rater_a.size());
  std::map<int, double> pa, pb;
  double agree = 0.0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    agree += rater_a[i] == rater_b[i] ? 1.0 : 0.0;
    pa[rater_a[i]] += 1.0 / n;
    pb[rater_b[i]] += 1.0 / n;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, p] : pa) {
    if (auto it = pb.find(label); it != pb.end()) pe += p * it->second;
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

void to_json(nlohmann::json& j, const SessionStats& s) {
  j = nlohmann::json{
      {"sessions", s.sessions},
      {"achievement_rate", s.achievement_rate},
      {"avg_shift_turn", s.avg_shift_turn ? nlohmann::json(*s.avg_shift_turn) : nlohmann::json(nullptr)},
      {"no_shift_count", s.no_shift_count}};
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  nlohmann::json r_at = nlohmann::json::object();
  for (const auto& [k, v] : r.r_at) r_at[std::to_string(k)] = v;
  j = nlohmann::json{{"r_at", r_at}, {"mrr", r.mrr}, {"ndcg", r.ndcg}, {"n", r.n}};
  j["session_stats"] = r.session_stats ? nlohmann::json(*r.session_stats) : nlohmann::json(nullptr);
}

}  // namespace mnemo
