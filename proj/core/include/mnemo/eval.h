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

#ifndef MNEMO_EVAL_H_
#define MNEMO_EVAL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"
#include "mnemo/ranker.h"
#include "mnemo/shift_engine.h"

namespace mnemo {

inline constexpr std::size_t kEvalCandidates = 10;

// Where the ground-truth topic landed among the candidates (1 = top).
struct RankingInstance {
  std::size_t candidate_count = kEvalCandidates;
  std::size_t truth_rank = 1;
};

// All metrics below throw kEmptySet on an empty input and kRangeError on an
// instance whose truth_rank lies outside [1, candidate_count].

// Fraction of instances with truth_rank <= k.
double recall_at_k(std::span<const RankingInstance> instances, std::size_t k);
// Mean reciprocal rank.
double mrr(std::span<const RankingInstance> instances);
// One relevant item with binary gain: mean of 1 / log2(truth_rank + 1).
double ndcg(std::span<const RankingInstance> instances);

struct SessionStats {
  std::size_t sessions = 0;
  double achievement_rate = 0.0;
  // Mean shift turn over sessions that shifted; nullopt when none did.
  std::optional<double> avg_shift_turn;
  std::size_t no_shift_count = 0;
};

// Throws kEmptySet.
SessionStats session_stats(std::span<const SessionOutcome> outcomes);
SessionStats session_stats(std::span<const std::optional<int>> shift_turns);

struct EvalReport {
  std::map<std::size_t, double> r_at;  // k in {1, 2, 3}
  double mrr = 0.0;
  double ndcg = 0.0;
  std::size_t n = 0;
  std::optional<SessionStats> session_stats;
};

EvalReport report_from_instances(std::span<const RankingInstance> instances);

// One retrieval test case: context utterances, candidate topic strings and
// the index of the ground truth (plus the optional judge-top alternative).
struct RetrievalCase {
  std::vector<Utterance> context;
  std::vector<std::string> candidates;
  std::size_t truth_index = 0;
  std::optional<std::size_t> alt_truth_index;
};

// Line-delimited {context, candidates, truth_index, alt_truth_index?}.
// Context entries may be utterance objects or bare strings; bare strings
// alternate speakers so that the last one is the user.
std::vector<RetrievalCase> load_testset(const std::filesystem::path& path);
void save_testset(std::span<const RetrievalCase> cases, const std::filesystem::path& path);

struct EvalOptions {
  // Accept candidate counts other than 10.
  bool allow_n = false;
  // Read alt_truth_index (the judge's top choice) instead of truth_index.
  bool use_alt_truth = false;
};

// Ranks each case with `model` and aggregates R@{1,2,3}, MRR and NDCG.
// Throws kShapeError on a case with the wrong candidate count (unless
// allow_n) or a truth index outside the candidates.
EvalReport evaluate_retrieval(const RankerModel& model, std::span<const RetrievalCase> cases,
                              Backend& backend, const EvalOptions& options = {});

// Next user utterance from a user-role backend. Throws
// kPreconditionViolation unless the transcript ends with the bot.
std::string simulate_user(const HistoryBundle& persona, std::span<const Utterance> transcript,
                          Backend& backend);

// UserSource backed by simulate_user. Never ends the conversation itself;
// the session's turn cap does.
class SimulatedUser : public UserSource {
 public:
  SimulatedUser(const HistoryBundle& persona, Backend& backend)
      : persona_(persona), backend_(backend) {}
  std::optional<std::string> next_user_utterance(const SessionState& state) override;

 private:
  const HistoryBundle& persona_;
  Backend& backend_;
};

// Externally annotated session scores.
struct Annotation {
  std::string session_id;
  std::vector<int> engagingness;
  std::vector<int> overall_quality;
  int achievement = 0;  // 0 none, 1 mentioned, 2 shifted
  int turn = 0;
};

std::vector<Annotation> load_annotations(const std::filesystem::path& path);

// Two-rater Cohen's kappa over paired categorical labels. Throws kEmptySet
// or kShapeError on length mismatch.
double cohens_kappa(std::span<const int> rater_a, std::span<const int> rater_b);

void to_json(nlohmann::json& j, const SessionStats& s);
void to_json(nlohmann::json& j, const EvalReport& r);

}  // namespace mnemo

#endif  // MNEMO_EVAL_H_
