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

#ifndef MNEMO_RANKER_H_
#define MNEMO_RANKER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mnemo/dialogue.h"
#include "mnemo/gateway.h"
#include "mnemo/summarizer.h"

// Bradley-Terry topic ranker.
//
// A topic t is scored against the conversation context c by a linear head
// over frozen embedding features, r(c, t) = theta . phi(c, t) + bias, and
// the preference of t+ over t- is modelled as
//
//   P(t+ > t- | c) = sigmoid(r(c, t+) - r(c, t-)).
//
// Training minimises the mean negative log-likelihood over preference
// pairs, log(1 + exp(r(c, t-) - r(c, t+))), by full-batch gradient descent.
namespace mnemo {

// The most recent (at most five) utterances of the live conversation.
struct ContextWindow {
  static constexpr std::size_t kMaxUtterances = 5;

  std::vector<Utterance> utterances;

  // Last kMaxUtterances of `transcript`.
  static ContextWindow tail_of(std::span<const Utterance> transcript);
  // Utterance texts joined by newlines; this is what gets embedded.
  std::string text() const;

  friend bool operator==(const ContextWindow&, const ContextWindow&) = default;
};

// Throws kPreconditionViolation if empty, longer than kMaxUtterances, or
// (when `for_retrieval`) not ending on a user utterance.
void validate(const ContextWindow& context, bool for_retrieval);

using FeatureVector = std::vector<double>;

// Feature length for embedding dimension D: [e_c * e_t ; |e_c - e_t| ; cos].
constexpr std::size_t feature_dim_for(std::size_t embedding_dim) {
  return 2 * embedding_dim + 1;
}

struct TrainMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  double final_loss = 0.0;

  friend bool operator==(const TrainMeta&, const TrainMeta&) = default;
};

struct RankerModel {
  std::vector<double> theta;
  double bias = 0.0;
  std::size_t embedding_dim = 0;
  std::size_t feature_dim = 0;
  TrainMeta train_meta;

  // All-zero model; every topic scores 0 and ranking falls back to index order.
  static RankerModel zeros(std::size_t embedding_dim);

  friend bool operator==(const RankerModel&, const RankerModel&) = default;
};

// Throws kDimMismatch or kNonFinite.
void validate(const RankerModel& model);

struct PreferencePair {
  FeatureVector pos;  // phi(c, t+)
  FeatureVector neg;  // phi(c, t-)
};

struct RankedCandidate {
  std::size_t topic_index = 0;
  double score = 0.0;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

// Features from two embeddings; both are L2-normalized first.
FeatureVector features_from_embeddings(const EmbeddingVector& context,
                                       const EmbeddingVector& topic);

FeatureVector featurize(const ContextWindow& context, const TopicEntry& topic,
                        Backend& backend);

// theta . feat + bias. Throws kDimMismatch.
double score(const RankerModel& model, std::span<const double> feat);

// sigmoid(r+ - r-), evaluated without overflow.
double pair_probability(const RankerModel& model, std::span<const double> pos,
                        std::span<const double> neg);

// Mean of log(1 + exp(r- - r+)). Throws kEmptyBatch.
double pairwise_loss(const RankerModel& model, std::span<const PreferencePair> pairs);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> theta;
  // Always zero: the bias cancels in every pairwise difference.
  double bias = 0.0;
};

// Loss and its analytic gradient,
// mean over pairs of sigmoid(r- - r+) * (phi- - phi+).
LossGradient loss_gradient(const RankerModel& model,
                           std::span<const PreferencePair> pairs);

struct TrainOptions {
  double learning_rate = 0.5;
  int epochs = 200;
  std::uint64_t seed = 42;
  // Called after every epoch with the 1-based epoch and the loss at the
  // updated parameters.
  std::function<void(int, double)> on_epoch;
};

// Full-batch gradient descent from theta ~ U(-0.01, 0.01) drawn from a
// mt19937_64 seeded with `seed`. Deterministic. Throws kEmptyBatch,
// kRangeError for bad hyperparameters, kDimMismatch for ragged pairs and
// kNonFinite if the loss or gradient overflows.
RankerModel train(std::span<const PreferencePair> pairs, const TrainOptions& options);

// Indices sorted by descending score; ties keep ascending index order.
std::vector<RankedCandidate> order_by_score(std::span<const double> scores);

std::vector<RankedCandidate> rank_features(const RankerModel& model,
                                           std::span<const FeatureVector> features);

// Scores every topic against `context`; the first element is t_r.
std::vector<RankedCandidate> rank(const RankerModel& model,
                                  const ContextWindow& context,
                                  std::span<const TopicEntry> topics,
                                  Backend& backend);

// --- Preference data -------------------------------------------------------

inline constexpr std::size_t kJudgeDistractors = 29;

// Request asking the judge for a strict total order of `candidates`
// (numbered from 1) by relevance to `context`.
GenerationRequest judge_request(const ContextWindow& context,
                                std::span<const TopicEntry> candidates);

// Parses "Ranking: 3, 1, 2" (label optional) into zero-based indices.
// Throws kJudgeParseError unless the numbers are a permutation of 1..n.
std::vector<std::size_t> parse_judge_ranking(std::string_view raw, std::size_t n);

struct TopicPair {
  TopicEntry pos;
  TopicEntry neg;
};

// Samples up to kJudgeDistractors topics from `pool`, has the judge order
// them together with `target`, and applies the selection rule:
//   T+ = {judge's top choice, target}  (one element when they coincide)
//   T- = topics the judge ranks strictly below target
// and pairs each t+ with one t- drawn uniformly from T-.
// Throws kNoNegatives when nothing ranks below target.
std::vector<TopicPair> build_preference_topics(const ContextWindow& context,
                                               const TopicEntry& target,
                                               std::span<const TopicEntry> pool,
                                               Backend& judge, std::uint64_t rng_seed);

// build_preference_topics followed by featurization with `judge`'s embedder.
std::vector<PreferencePair> build_preference_pairs(const ContextWindow& context,
                                                   const TopicEntry& target,
                                                   std::span<const TopicEntry> pool,
                                                   Backend& judge,
                                                   std::uint64_t rng_seed);

// --- Persistence -----------------------------------------------------------

void to_json(nlohmann::json& j, const RankerModel& m);
void from_json(const nlohmann::json& j, RankerModel& m);
void to_json(nlohmann::json& j, const RankedCandidate& c);
void to_json(nlohmann::json& j, const ContextWindow& c);

RankerModel load_model(const std::filesystem::path& path);
void save_model(const RankerModel& model, const std::filesystem::path& path);

}  // namespace mnemo

#endif  // MNEMO_RANKER_H_
