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

#include "cli.h"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mnemo/config.h"
#include "mnemo/data_forge.h"
#include "mnemo/error.h"
#include "mnemo/eval.h"
#include "mnemo/http_backend.h"
#include "mnemo/memory_store.h"
#include "mnemo/mock_backend.h"
#include "mnemo/ranker.h"
#include "mnemo/service.h"
#include "mnemo/shift_engine.h"

namespace mnemo::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mock_dir;
};

Config effective_config(const GlobalFlags& g) {
  Config c;
  if (!g.config_path.empty()) {
    c = Config::load(g.config_path);
  } else {
    apply_api_key_env(c);
  }
  if (g.seed) c.ranker.seed = *g.seed;
  if (!g.mock_dir.empty()) c.paths.fixtures = g.mock_dir;
  return c;
}

std::unique_ptr<Backend> make_backend(const Config& c) {
  if (!c.paths.fixtures.empty()) {
    return std::make_unique<MockBackend>(MockFixtures::load_dir(c.paths.fixtures));
  }
  if (c.backend.endpoint_url.empty()) {
    throw Error(Errc::kConfigError,
                "no backend: pass --mock <fixture-dir> or set backend.endpoint_url");
  }
  HttpBackendOptions o;
  o.endpoint_url = c.backend.endpoint_url;
  o.model = c.backend.model_name;
  o.embedding_model = c.backend.embedding_model;
  o.api_key = c.backend.api_key;
  o.retries = c.backend.retries;
  o.initial_backoff = std::chrono::milliseconds(c.backend.backoff_ms);
  return std::make_unique<HttpBackend>(o);
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void log_run(std::ostream& err, std::string_view command, const Config& c) {
  err << "[mnemo] command=" << command << " seed=" << c.ranker.seed
      << " config=" << config_hash(c) << '\n';
}

RankerModel model_or_zeros(const std::string& path, const Config& c) {
  if (!path.empty()) return load_model(path);
  return RankerModel::zeros(c.ranker.embedding_dim);
}

// --- forge -----------------------------------------------------------------

struct ForgeFlags {
  std::string preset = "small";
  std::optional<int> per_memorable;
  std::optional<int> continuations;
  std::string out_dir = ".";
};

int run_forge(const GlobalFlags& g, const ForgeFlags& f, std::ostream& out, std::ostream& err) {
  const Config c = effective_config(g);
  log_run(err, "forge", c);
  ForgePlan plan = ForgePlan::preset(f.preset);
  if (f.per_memorable) {
    plan.per_memorable = *f.per_memorable;
    plan.per_general = 2 * *f.per_memorable;
  }
  if (f.continuations) plan.continuations = *f.continuations;
  plan.seed = c.ranker.seed;
  auto backend = make_backend(c);
  Forge forge(*backend, plan);
  const ForgeDataset data = forge.run();

  fs::create_directories(f.out_dir);
  MemoryStore historical;
  for (const auto& d : data.historical) historical.add(d);
  historical.save(fs::path(f.out_dir) / "historical.jsonl");
  MemoryStore current;
  for (const auto& d : data.current) current.add(d);
  current.save(fs::path(f.out_dir) / "current.jsonl");
  save_bundles(data.bundles, fs::path(f.out_dir) / "bundles.jsonl");

  json report{{"stats", forge_stats(data.historical, data.current)},
              {"counters", data.counters},
              {"bundles", data.bundles.size()}};
  write_json_file(report, fs::path(f.out_dir) / "stats.json");
  out << report.dump(2) << '\n';
  return kExitOk;
}

// --- train-ranker ----------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string format = "testset";
  std::string out = "model.json";
  std::optional<int> epochs;
  std::optional<double> learning_rate;
};

std::vector<PreferencePair> pairs_from_testset(const std::vector<RetrievalCase>& cases,
                                               Backend& backend, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PreferencePair> pairs;
  for (const auto& c : cases) {
    if (c.candidates.size() < 2 || c.truth_index >= c.candidates.size()) {
      throw Error(Errc::kShapeError, "training case needs a truth and a negative");
    }
    std::size_t neg = std::uniform_int_distribution<std::size_t>(0, c.candidates.size() - 2)(rng);
    if (neg >= c.truth_index) ++neg;
    const auto context = ContextWindow::tail_of(c.context);
    pairs.push_back(
        {featurize(context, {"pos", c.candidates[c.truth_index], TopicSource::kProvided}, backend),
         featurize(context, {"neg", c.candidates[neg], TopicSource::kProvided}, backend)});
  }
  return pairs;
}

std::vector<PreferencePair> pairs_from_judge(const fs::path& path, Backend& backend,
                                             std::uint64_t seed, std::ostream& err) {
  std::vector<PreferencePair> pairs;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ContextWindow context;
    TopicEntry target;
    std::vector<TopicEntry> pool;
    try {
      const json j = json::parse(line);
      for (const auto& u : j.at("context")) context.utterances.push_back(u.get<Utterance>());
      context = ContextWindow::tail_of(context.utterances);
      target = {"target", j.at("target").get<std::string>(), TopicSource::kProvided};
      std::size_t i = 0;
      for (const auto& t : j.at("pool")) {
        pool.push_back({"pool-" + std::to_string(i++), t.get<std::string>(),
                        TopicSource::kProvided});
      }
    } catch (const json::exception& e) {
      throw Error(Errc::kParseError, e.what(), number);
    }
    try {
      auto built = build_preference_pairs(context, target, pool, backend, seed + number);
      pairs.insert(pairs.end(), built.begin(), built.end());
    } catch (const Error& e) {
      if (e.code() != Errc::kNoNegatives) throw;
      ++skipped;
    }
  }
  if (skipped > 0) err << "[mnemo] skipped " << skipped << " instances without negatives\n";
  return pairs;
}

int run_train(const GlobalFlags& g, const TrainFlags& f, std::ostream& out, std::ostream& err) {
  Config c = effective_config(g);
  if (f.epochs) c.ranker.epochs = *f.epochs;
  if (f.learning_rate) c.ranker.learning_rate = *f.learning_rate;
  validate(c);
  log_run(err, "train-ranker", c);
  auto backend = make_backend(c);
  std::vector<PreferencePair> pairs;
  if (f.format == "testset") {
    pairs = pairs_from_testset(load_testset(f.data), *backend, c.ranker.seed);
  } else if (f.format == "judge") {
    pairs = pairs_from_judge(f.data, *backend, c.ranker.seed, err);
  } else {
    throw Error(Errc::kConfigError, "unknown --format '" + f.format + "'");
  }
  TrainOptions opts;
  opts.learning_rate = c.ranker.learning_rate;
  opts.epochs = c.ranker.epochs;
  opts.seed = c.ranker.seed;
  const RankerModel model = train(pairs, opts);
  save_model(model, f.out);
  out << json{{"pairs", pairs.size()},
              {"final_loss", model.train_meta.final_loss},
              {"model", f.out}}
             .dump(2)
      << '\n';
  return kExitOk;
}

// --- eval-retrieval --------------------------------------------------------

struct EvalFlags {
  std::string testset;
  std::string model;
  bool allow_n = false;
  bool alt_truth = false;
};

int run_eval(const GlobalFlags& g, const EvalFlags& f, std::ostream& out, std::ostream& err) {
  const Config c = effective_config(g);
  log_run(err, "eval-retrieval", c);
  auto backend = make_backend(c);
  const RankerModel model = model_or_zeros(f.model, c);
  EvalOptions opts;
  opts.allow_n = f.allow_n;
  opts.use_alt_truth = f.alt_truth;
  const EvalReport report = evaluate_retrieval(model, load_testset(f.testset), *backend, opts);
  out << json(report).dump(2) << '\n';
  return kExitOk;
}

// --- run-session -----------------------------------------------------------

struct SessionFlags {
  std::string session_file;
  std::string model;
  std::string policy;
  std::optional<int> max_turns;
  bool run_to_cap = false;
  bool simulate_user = false;
};

int run_session_cmd(const GlobalFlags& g, const SessionFlags& f, std::ostream& out,
                    std::ostream& err) {
  Config c = effective_config(g);
  if (!f.policy.empty()) c.session.policy = policy_from_string(f.policy);
  if (f.max_turns) c.session.max_turns = *f.max_turns;
  if (f.run_to_cap) c.session.run_to_cap = true;
  validate(c);
  log_run(err, "run-session", c);

  fs::path session_path = f.session_file;
  if (session_path.empty()) {
    if (c.paths.fixtures.empty()) {
      throw Error(Errc::kConfigError, "pass --session or a --mock dir with session.json");
    }
    session_path = fs::path(c.paths.fixtures) / "session.json";
  }
  const json spec = read_json_file(session_path);
  HistoryBundle bundle;
  std::vector<Utterance> opening;
  std::vector<std::string> script;
  try {
    bundle = spec.at("bundle").get<HistoryBundle>();
    opening = spec.at("opening").get<std::vector<Utterance>>();
    script = spec.value("user_script", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, session_path.string() + ": " + e.what());
  }

  auto backend = make_backend(c);
  const RankerModel model = model_or_zeros(f.model, c);
  EngineOptions eo;
  eo.run_to_cap = c.session.run_to_cap;
  eo.temperature = c.backend.dialogue_temperature;
  ShiftEngine engine(model, *backend, eo);

  ScriptedUser scripted(script);
  SimulatedUser simulated(bundle, *backend);
  UserSource& user = f.simulate_user ? static_cast<UserSource&>(simulated)
                                     : static_cast<UserSource&>(scripted);
  const SessionOutcome outcome =
      engine.run_session(bundle, opening, user, c.session.policy, c.session.max_turns);

  for (const auto& u : outcome.transcript) {
    out << (u.speaker == Speaker::kUser ? "User: " : "Bot:  ") << u.text;
    if (u.shift) out << "   [shift=" << (*u.shift ? "Yes" : "No") << "]";
    out << '\n';
  }
  out << "retrieved_topic: "
      << (outcome.retrieved_topic ? outcome.retrieved_topic->topic : std::string("none")) << '\n';
  out << "shift_turn: "
      << (outcome.shift_turn ? std::to_string(*outcome.shift_turn) : std::string("none"))
      << '\n';
  return kExitOk;
}

// --- serve -----------------------------------------------------------------

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string bundles;
  std::string model;
  std::string policy;
  std::optional<int> max_turns;
  std::string snapshot;
};

Service* g_running_service = nullptr;

int run_serve(const GlobalFlags& g, const ServeFlags& f, std::ostream& out, std::ostream& err) {
  Config c = effective_config(g);
  if (!f.policy.empty()) c.session.policy = policy_from_string(f.policy);
  if (f.max_turns) c.session.max_turns = *f.max_turns;
  validate(c);
  log_run(err, "serve", c);

  ServiceOptions so;
  so.default_policy = c.session.policy;
  so.default_max_turns = c.session.max_turns;
  so.engine.run_to_cap = c.session.run_to_cap;
  so.engine.temperature = c.backend.dialogue_temperature;
  const std::string bundles_path = f.bundles.empty() ? c.paths.bundles : f.bundles;
  if (!bundles_path.empty()) {
    for (auto& b : load_bundles(bundles_path)) {
      const std::string id = b.anchor_id;
      so.bundles.emplace(id, std::move(b));
    }
  }
  if (!f.snapshot.empty()) so.snapshot_store = f.snapshot;

  auto backend = make_backend(c);
  const RankerModel model = model_or_zeros(f.model, c);
  Service service(model, *backend, std::move(so));
  g_running_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_running_service) g_running_service->stop();
  });
  out << "listening on http://" << f.host << ":" << f.port << '\n' << std::flush;
  const bool ok = service.listen(f.host, f.port);
  g_running_service = nullptr;
  if (!ok) throw Error(Errc::kIoError, "cannot listen on " + f.host + ":" + std::to_string(f.port));
  return kExitOk;
}

// --- stats -----------------------------------------------------------------

struct StatsFlags {
  std::string historical;
  std::string current;
};

int run_stats(const GlobalFlags& g, const StatsFlags& f, std::ostream& out, std::ostream& err) {
  const Config c = effective_config(g);
  log_run(err, "stats", c);
  MemoryStore historical;
  MemoryStore current;
  if (!f.historical.empty()) historical = MemoryStore::load(f.historical);
  if (!f.current.empty()) current = MemoryStore::load(f.current);
  out << json(forge_stats(historical.dialogues(), current.dialogues())).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mnemo: memory-aware proactive dialogue engine", "mnemo"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config_path, "Flat JSON config file");
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--mock", g.mock_dir, "Mock backend fixture directory");

  ForgeFlags ff;
  auto* forge = app.add_subcommand("forge", "Build a synthetic memory-dialogue corpus");
  forge->add_option("--preset", ff.preset, "small | chmap | chmap-test");
  forge->add_option("--per-memorable", ff.per_memorable, "Dialogues per memorable subject");
  forge->add_option("--continuations", ff.continuations, "Anchors with a current session");
  forge->add_option("--out", ff.out_dir, "Output directory");

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train-ranker", "Fit the pairwise topic ranker");
  train_cmd->add_option("--data", tf.data, "Training file")->required();
  train_cmd->add_option("--format", tf.format, "testset | judge");
  train_cmd->add_option("--out", tf.out, "Model output path");
  train_cmd->add_option("--epochs", tf.epochs);
  train_cmd->add_option("--lr", tf.learning_rate);

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval-retrieval", "R@k / MRR / NDCG on a test set");
  eval_cmd->add_option("--testset", ef.testset)->required();
  eval_cmd->add_option("--model", ef.model, "Ranker model (zero model if omitted)");
  eval_cmd->add_flag("--allow-n", ef.allow_n, "Accept candidate counts other than 10");
  eval_cmd->add_flag("--alt-truth", ef.alt_truth, "Score against alt_truth_index");

  SessionFlags sf;
  auto* session_cmd = app.add_subcommand("run-session", "Run one proactive session");
  session_cmd->add_option("--session", sf.session_file, "{bundle, opening, user_script}");
  session_cmd->add_option("--model", sf.model);
  session_cmd->add_option("--policy", sf.policy, "per_session | per_utterance");
  session_cmd->add_option("--max-turns", sf.max_turns);
  session_cmd->add_flag("--run-to-cap", sf.run_to_cap, "Continue after a shift until the cap");
  session_cmd->add_flag("--simulate-user", sf.simulate_user, "Drive the user side by the backend");

  ServeFlags vf;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
  serve_cmd->add_option("--host", vf.host);
  serve_cmd->add_option("--port", vf.port);
  serve_cmd->add_option("--bundles", vf.bundles, "Bundles file (one per line)");
  serve_cmd->add_option("--model", vf.model);
  serve_cmd->add_option("--policy", vf.policy);
  serve_cmd->add_option("--max-turns", vf.max_turns);
  serve_cmd->add_option("--snapshot", vf.snapshot, "Append closed sessions to this store");

  StatsFlags stf;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics for store files");
  stats_cmd->add_option("--historical", stf.historical);
  stats_cmd->add_option("--current", stf.current);

  std::vector<const char*> argv;
  argv.push_back("mnemo");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mnemo: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*forge) return run_forge(g, ff, out, err);
    if (*train_cmd) return run_train(g, tf, out, err);
    if (*eval_cmd) return run_eval(g, ef, out, err);
    if (*session_cmd) return run_session_cmd(g, sf, out, err);
    if (*serve_cmd) return run_serve(g, vf, out, err);
    if (*stats_cmd) return run_stats(g, stf, out, err);
  } catch (const Error& e) {
    err << "mnemo: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace mnemo::cli
