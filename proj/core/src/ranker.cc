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

#include "mnemo/ranker.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "mnemo/error.h"
#include "mnemo/text.h"

namespace mnemo {

namespace {

void require_dim(const RankerModel& model, std::span<const double> feat) {
  if (feat.size() != model.theta.size()) {
    throw Error(Errc::kDimMismatch, "feature length " + std::to_string(feat.size()) +
                                        " != " + std::to_string(model.theta.size()));
  }
}

// log(1 + e^x) without overflow for large |x|.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// r(c, t-) - r(c, t+) = theta . (phi- - phi+); the bias cancels exactly.
double margin(const RankerModel& model, const PreferencePair& p) {
  require_dim(model, p.pos);
  require_dim(model, p.neg);
  double d = 0.0;
  for (std::size_t j = 0; j < model.theta.size(); ++j) {
    d += model.theta[j] * (p.neg[j] - p.pos[j]);
  }
  return d;
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

ContextWindow ContextWindow::tail_of(std::span<const Utterance> transcript) {
  const std::size_t take = std::min(transcript.size(), kMaxUtterances);
  ContextWindow w;
  w.utterances.assign(transcript.end() - static_cast<std::ptrdiff_t>(take),
                      transcript.end());
  return w;
}

std::string ContextWindow::text() const {
  std::string out;
  for (const auto& u : utterances) {
    if (!out.empty()) out += '\n';
    out += u.text;
  }
  return out;
}

void validate(const ContextWindow& context, bool for_retrieval) {
  if (context.utterances.empty()) {
    throw Error(Errc::kPreconditionViolation, "context window is empty");
  }
  if (context.utterances.size() > ContextWindow::kMaxUtterances) {
    throw Error(Errc::kPreconditionViolation, "context window exceeds 5 utterances");
  }
  if (for_retrieval && context.utterances.back().speaker != Speaker::kUser) {
    throw Error(Errc::kPreconditionViolation, "retrieval context must end on a user turn");
  }
}

RankerModel RankerModel::zeros(std::size_t embedding_dim) {
  RankerModel m;
  m.embedding_dim = embedding_dim;
  m.feature_dim = feature_dim_for(embedding_dim);
  m.theta.assign(m.feature_dim, 0.0);
  return m;
}

void validate(const RankerModel& model) {
  if (model.theta.size() != model.feature_dim ||
      model.feature_dim != feature_dim_for(model.embedding_dim)) {
    throw Error(Errc::kDimMismatch, "model theta/feature_dim/embedding_dim disagree");
  }
  for (double t : model.theta) {
    if (!std::isfinite(t)) throw Error(Errc::kNonFinite, "non-finite theta");
  }
  if (!std::isfinite(model.bias)) throw Error(Errc::kNonFinite, "non-finite bias");
}

FeatureVector features_from_embeddings(const EmbeddingVector& context,
                                       const EmbeddingVector& topic) {
  if (context.dim() != topic.dim()) {
    throw Error(Errc::kDimMismatch, "context and topic embeddings differ in size");
  }
  const EmbeddingVector ec = context.normalized();
  const EmbeddingVector et = topic.normalized();
  const std::size_t d = ec.dim();
  FeatureVector f(feature_dim_for(d));
  double cos = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    f[i] = ec[i] * et[i];
    f[d + i] = std::abs(ec[i] - et[i]);
    cos += f[i];
  }
  f[2 * d] = cos;
  return f;
}

FeatureVector featurize(const ContextWindow& context, const TopicEntry& topic,
                        Backend& backend) {
  validate(context, false);
  if (text::is_blank(topic.topic)) {
    throw Error(Errc::kPreconditionViolation, "topic text is empty");
  }
  const std::vector<std::string> texts = {context.text(), topic.topic};
  const auto e = embed(backend, texts);
  return features_from_embeddings(e[0], e[1]);
}

double score(const RankerModel& model, std::span<const double> feat) {
  require_dim(model, feat);
  double s = model.bias;
  for (std::size_t j = 0; j < feat.size(); ++j) s += model.theta[j] * feat[j];
  return s;
}

double pair_probability(const RankerModel& model, std::span<const double> pos,
                        std::span<const double> neg) {
  return sigmoid(score(model, pos) - score(model, neg));
}

double pairwise_loss(const RankerModel& model, std::span<const PreferencePair> pairs) {
  if (pairs.empty()) throw Error(Errc::kEmptyBatch, "no preference pairs");
  double total = 0.0;
  for (const auto& p : pairs) total += softplus(margin(model, p));
  return total / static_cast<double>(pairs.size());
}

LossGradient loss_gradient(const RankerModel& model,
                           std::span<const PreferencePair> pairs) {
  if (pairs.empty()) throw Error(Errc::kEmptyBatch, "no preference pairs");
  LossGradient g;
  g.theta.assign(model.theta.size(), 0.0);
  for (const auto& p : pairs) {
    const double d = margin(model, p);
    g.loss += softplus(d);
    const double w = sigmoid(d);
    for (std::size_t j = 0; j < g.theta.size(); ++j) g.theta[j] += w * (p.neg[j] - p.pos[j]);
  }
  const double n = static_cast<double>(pairs.size());
  g.loss /= n;
  for (double& v : g.theta) v /= n;
  return g;
}

RankerModel train(std::span<const PreferencePair> pairs, const TrainOptions& options) {
  if (pairs.empty()) throw Error(Errc::kEmptyBatch, "no preference pairs");
  if (!(options.learning_rate > 0.0) || !std::isfinite(options.learning_rate)) {
    throw Error(Errc::kRangeError, "learning_rate must be > 0");
  }
  if (options.epochs < 1) throw Error(Errc::kRangeError, "epochs must be >= 1");
  const std::size_t f = pairs.front().pos.size();
  if (f % 2 == 0) {
    throw Error(Errc::kDimMismatch, "feature length must be 2 * embedding_dim + 1");
  }

  RankerModel model = RankerModel::zeros((f - 1) / 2);
  std::mt19937_64 rng(options.seed);
  for (double& t : model.theta) t = -0.01 + 0.02 * unit_draw(rng);

  double loss = 0.0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const LossGradient g = loss_gradient(model, pairs);
    for (std::size_t j = 0; j < f; ++j) {
      if (!std::isfinite(g.theta[j])) throw Error(Errc::kNonFinite, "gradient overflow");
      model.theta[j] -= options.learning_rate * g.theta[j];
    }
    model.bias -= options.learning_rate * g.bias;
    loss = pairwise_loss(model, pairs);
    if (!std::isfinite(loss)) throw Error(Errc::kNonFinite, "loss overflow");
    if (options.on_epoch) options.on_epoch(epoch, loss);
  }
  model.train_meta = {options.seed, options.epochs, options.learning_rate, loss};
  return model;
}

std::vector<RankedCandidate> order_by_score(std::span<const double> scores) {
  std::vector<RankedCandidate> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = {i, scores[i]};
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.score > b.score;
  });
  return out;
}

std::vector<RankedCandidate> rank_features(const RankerModel& model,
                                           std::span<const FeatureVector> features) {
  std::vector<double> scores;
  scores.reserve(features.size());
  for (const auto& f : features) {
    const double s = score(model, f);
    if (!std::isfinite(s)) throw Error(Errc::kNonFinite, "non-finite score");
    scores.push_back(s);
  }
  return order_by_score(scores);
}

namespace {

std::vector<FeatureVector> featurize_all(const ContextWindow& context,
                                         std::span<const TopicEntry> topics,
                                         Backend& backend) {
  validate(context, false);
  std::vector<std::string> texts;
  texts.reserve(topics.size() + 1);
  texts.push_back(context.text());
  for (const auto& t : topics) {
    if (text::is_blank(t.topic)) {
      throw Error(Errc::kPreconditionViolation, "topic text is empty");
    }
    texts.push_back(t.topic);
  }
  const auto e = embed(backend, texts);
  std::vector<FeatureVector> out;
  out.reserve(topics.size());
  for (std::size_t i = 1; i < e.size(); ++i) {
    out.push_back(features_from_embeddings(e[0], e[i]));
  }
  return out;
}

}  // namespace

std::vector<RankedCandidate> rank(const RankerModel& model,
                                  const ContextWindow& context,
                                  std::span<const TopicEntry> topics,
                                  Backend& backend) {
  if (topics.empty()) throw Error(Errc::kPreconditionViolation, "no topics to rank");
  return rank_features(model, featurize_all(context, topics, backend));
}

GenerationRequest judge_request(const ContextWindow& context,
                                std::span<const TopicEntry> candidates) {
  std::string user = "Conversation:\n" + render_transcript(context.utterances) +
                     "\nTopics:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    user += std::to_string(i + 1) + ". " + candidates[i].topic + "\n";
  }
  GenerationRequest req;
  req.messages.push_back(
      {Role::kSystem,
       "You judge how relevant stored conversation topics are to an ongoing "
       "conversation. Order ALL numbered topics from most to least relevant, "
       "with no ties. Reply with a single line of the form "
       "'Ranking: <n>, <n>, ...' listing every topic number exactly once."});
  req.messages.push_back({Role::kUser, std::move(user)});
  req.temperature = kJudgeTemperature;
  req.max_tokens = 256;
  return req;
}

std::vector<std::size_t> parse_judge_ranking(std::string_view raw, std::size_t n) {
  std::string_view body = raw;
  if (auto pos = raw.rfind("Ranking:"); pos != std::string_view::npos) {
    body = raw.substr(pos + 8);
    if (auto eol = body.find('\n'); eol != std::string_view::npos) body = body.substr(0, eol);
  }
  std::vector<std::size_t> order;
  std::set<std::size_t> seen;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] < '0' || body[i] > '9') {
      ++i;
      continue;
    }
    std::size_t value = 0;
    while (i < body.size() && body[i] >= '0' && body[i] <= '9') {
      value = value * 10 + static_cast<std::size_t>(body[i] - '0');
      if (value > 1'000'000) throw Error(Errc::kJudgeParseError, "topic number too large");
      ++i;
    }
    if (value < 1 || value > n || !seen.insert(value).second) {
      throw Error(Errc::kJudgeParseError,
                  "invalid or repeated topic number " + std::to_string(value));
    }
    order.push_back(value - 1);
  }
  if (order.size() != n) {
    throw Error(Errc::kJudgeParseError, "judge ranked " + std::to_string(order.size()) +
                                            " of " + std::to_string(n) + " topics");
  }
  return order;
}

std::vector<TopicPair> build_preference_topics(const ContextWindow& context,
                                               const TopicEntry& target,
                                               std::span<const TopicEntry> pool,
                                               Backend& judge, std::uint64_t rng_seed) {
  validate(context, false);
  for (const auto& t : pool) {
    if (t.dialogue_id == target.dialogue_id) {
      throw Error(Errc::kPreconditionViolation, "pool contains the target topic");
    }
  }
  std::mt19937_64 rng(rng_seed);

  // Partial Fisher-Yates: the first k slots become the distractor sample.
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t k = std::min(kJudgeDistractors, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + index_draw(rng, idx.size() - i)]);
  }
  std::vector<TopicEntry> candidates;
  candidates.reserve(k + 1);
  candidates.push_back(target);
  for (std::size_t i = 0; i < k; ++i) candidates.push_back(pool[idx[i]]);
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[index_draw(rng, i)]);
  }

  const auto order =
      parse_judge_ranking(chat(judge, judge_request(context, candidates)), candidates.size());
  std::size_t target_pos = 0;
  while (candidates[order[target_pos]].dialogue_id != target.dialogue_id) ++target_pos;

  std::vector<const TopicEntry*> positives = {&candidates[order.front()]};
  if (target_pos != 0) positives.push_back(&candidates[order[target_pos]]);
  std::vector<const TopicEntry*> negatives;
  for (std::size_t i = target_pos + 1; i < order.size(); ++i) {
    negatives.push_back(&candidates[order[i]]);
  }
  if (negatives.empty()) {
    throw Error(Errc::kNoNegatives, "no topic ranked below target " + target.dialogue_id);
  }

  std::vector<TopicPair> out;
  for (const TopicEntry* pos : positives) {
    out.push_back({*pos, *negatives[index_draw(rng, negatives.size())]});
  }
  return out;
}

std::vector<PreferencePair> build_preference_pairs(const ContextWindow& context,
                                                   const TopicEntry& target,
                                                   std::span<const TopicEntry> pool,
                                                   Backend& judge,
                                                   std::uint64_t rng_seed) {
  const auto topics = build_preference_topics(context, target, pool, judge, rng_seed);
  std::vector<TopicEntry> flat;
  for (const auto& tp : topics) {
    flat.push_back(tp.pos);
    flat.push_back(tp.neg);
  }
  const auto features = featurize_all(context, flat, judge);
  std::vector<PreferencePair> out;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    out.push_back({features[2 * i], features[2 * i + 1]});
  }
  return out;
}

void to_json(nlohmann::json& j, const RankerModel& m) {
  j = nlohmann::json{{"theta", m.theta},
                     {"bias", m.bias},
                     {"embedding_dim", m.embedding_dim},
                     {"feature_dim", m.feature_dim},
                     {"train_meta",
                      {{"seed", m.train_meta.seed},
                       {"epochs", m.train_meta.epochs},
                       {"learning_rate", m.train_meta.learning_rate},
                       {"final_loss", m.train_meta.final_loss}}}};
}

void from_json(const nlohmann::json& j, RankerModel& m) {
  m.theta = j.at("theta").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  m.feature_dim = j.at("feature_dim").get<std::size_t>();
  const auto& meta = j.at("train_meta");
  m.train_meta.seed = meta.at("seed").get<std::uint64_t>();
  m.train_meta.epochs = meta.at("epochs").get<int>();
  m.train_meta.learning_rate = meta.at("learning_rate").get<double>();
  m.train_meta.final_loss = meta.at("final_loss").get<double>();
}

void to_json(nlohmann::json& j, const RankedCandidate& c) {
  j = nlohmann::json{{"topic_index", c.topic_index}, {"score", c.score}};
}

void to_json(nlohmann::json& j, const ContextWindow& c) { j = c.utterances; }

RankerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  RankerModel m;
  try {
    m = nlohmann::json::parse(in).get<RankerModel>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, path.string() + ": " + e.what());
  }
  validate(m);
  return m;
}

void save_model(const RankerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  // max_digits10 via dump() keeps the round trip exact.
  out << nlohmann::json(model).dump() << '\n';
  if (!out) throw Error(Errc::kIoError, "write failed for " + path.string());
}

}  // namespace mnemo
