// Copyright 2026 The Wolp Authors.
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

#include "wolp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "wolp/cartpole.hpp"
#include "wolp/lemma.hpp"
#include "wolp/puddle_world.hpp"
#include "wolp/recommender.hpp"
#include "wolp/tabular.hpp"

namespace wolp::harness {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

json default_experiment_json() {
  return json::parse(R"({
    "seed": 0,
    "out": "",
    "env": {
      "type": "puddle",
      "map": "",
      "rows": 20,
      "cols": 20,
      "map_seed": 1,
      "plan_length": 8,
      "window_radius": 2,
      "data": "",
      "items": 1000,
      "embed_dim": 20,
      "neighbors_per_item": 20,
      "data_seed": 7,
      "accept_end_probability": 0.1,
      "reject_end_probability": 0.2,
      "guided_subset_size": 10,
      "actions": 1000,
      "force_max": 10.0,
      "max_steps": 500,
      "mdp": "chain"
    },
    "policy": {"k": "1", "tier": "exact", "refinement": true},
    "index": {
      "branching": null,
      "kmeans_iterations": null,
      "trees": null,
      "checks": null,
      "leaf_size": null,
      "parallel_scan": null
    },
    "trainer": {
      "gamma": 0.99,
      "tau": 0.001,
      "minibatch_size": 64,
      "buffer_capacity": 100000,
      "warmup_steps": 1000,
      "episodes": 0,
      "max_env_steps": 10000,
      "steps_per_episode": 1000,
      "actor_learning_rate": 0.0001,
      "critic_learning_rate": 0.001,
      "hidden_sizes": [64, 64],
      "noise_fraction": 0.1,
      "epsilon_start": 1.0,
      "epsilon_end": 0.05,
      "epsilon_fraction": 0.2,
      "reward_scale": 1.0,
      "target_k": 0,
      "guided_exploration": true
    },
    "eval": {"every": 5000, "episodes": 20, "max_steps": 100},
    "sweep": {"k": ["1"], "tiers": ["exact"]},
    "lemma": {
      "p": [0.0, 0.1, 0.3, 0.5, 0.9],
      "k": [1, 2, 5, 10, 50],
      "bc": [[0.5, 0.5], [0.5, 1.0], [1.0, 2.0]],
      "q": 0.0,
      "samples": 1000000,
      "seed": 2017,
      "tolerance_se": 4.0
    },
    "recall": {
      "actions": "",
      "random": 13138,
      "dim": 20,
      "k": 10,
      "queries": 1000,
      "tiers": ["slow", "medium", "fast"]
    }
  })");
}

namespace {

void merge_into(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw std::invalid_argument("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      merge_into(slot, it.value(), key);
    } else if (slot.is_object()) {
      throw std::invalid_argument("config: '" + key + "' must be an object");
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& section) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: bad value for " + section + "." + key + ": " + e.what());
  }
}

fs::path resolve_path(const std::string& p, const fs::path& base) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string key_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw std::invalid_argument("config: policy.k must be an integer or a string like \"5%\"");
}

IndexConfig index_config(const json& overrides, IndexTier tier) {
  IndexConfig c = IndexConfig::for_tier(tier);
  auto set_int = [&](const char* key, int& field) {
    if (!overrides.at(key).is_null()) field = get<int>(overrides, key, "index");
  };
  set_int("branching", c.branching);
  set_int("kmeans_iterations", c.kmeans_iterations);
  set_int("trees", c.trees);
  set_int("checks", c.checks);
  set_int("leaf_size", c.leaf_size);
  if (!overrides.at("parallel_scan").is_null()) {
    c.parallel_scan = get<bool>(overrides, "parallel_scan", "index");
  }
  c.validate();
  return c;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string sanitize(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == ',' || c == '\n' || c == '"'; }, ' ');
  return s;
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json patch = value;
  std::size_t end = path.size();
  while (true) {
    const auto dot = path.rfind('.', end - 1);
    const std::string key = path.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    if (key.empty()) throw std::invalid_argument("--set: empty key in '" + path + "'");
    patch = json{{key, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_into(doc, patch, "");
}

ExperimentConfig ExperimentConfig::from_json(const json& doc, fs::path base_dir) {
  json merged = default_experiment_json();
  merge_into(merged, doc, "");

  ExperimentConfig c;
  c.document = merged;
  c.base_dir = std::move(base_dir);
  c.seed = get<std::uint64_t>(merged, "seed", "");
  const auto out = get<std::string>(merged, "out", "");
  c.out = out.empty() ? fs::path() : resolve_path(out, fs::path());
  c.env = merged.at("env");

  const json& p = merged.at("policy");
  c.policy.k = KSpec::parse(key_text(p.at("k")));
  c.policy.refinement = get<bool>(p, "refinement", "policy");
  c.index = index_config(merged.at("index"), parse_tier(get<std::string>(p, "tier", "policy")));

  const json& t = merged.at("trainer");
  TrainerConfig& tc = c.trainer;
  tc.gamma = get<double>(t, "gamma", "trainer");
  tc.tau = get<double>(t, "tau", "trainer");
  tc.minibatch_size = get<int>(t, "minibatch_size", "trainer");
  tc.buffer_capacity = get<std::size_t>(t, "buffer_capacity", "trainer");
  tc.warmup_steps = get<std::int64_t>(t, "warmup_steps", "trainer");
  tc.episodes = get<std::int64_t>(t, "episodes", "trainer");
  tc.max_env_steps = get<std::int64_t>(t, "max_env_steps", "trainer");
  tc.steps_per_episode = get<int>(t, "steps_per_episode", "trainer");
  tc.actor_learning_rate = get<double>(t, "actor_learning_rate", "trainer");
  tc.critic_learning_rate = get<double>(t, "critic_learning_rate", "trainer");
  tc.hidden_sizes = get<std::vector<int>>(t, "hidden_sizes", "trainer");
  tc.noise_fraction = get<double>(t, "noise_fraction", "trainer");
  tc.epsilon.start = get<double>(t, "epsilon_start", "trainer");
  tc.epsilon.end = get<double>(t, "epsilon_end", "trainer");
  tc.epsilon.fraction = get<double>(t, "epsilon_fraction", "trainer");
  tc.reward_scale = get<double>(t, "reward_scale", "trainer");
  tc.target_k = get<int>(t, "target_k", "trainer");
  tc.guided_exploration = get<bool>(t, "guided_exploration", "trainer");
  tc.seed = c.seed;
  tc.validate();

  const json& e = merged.at("eval");
  c.eval.every = get<std::int64_t>(e, "every", "eval");
  c.eval.episodes = get<int>(e, "episodes", "eval");
  c.eval.max_steps = get<int>(e, "max_steps", "eval");
  if (c.eval.every < 0 || c.eval.episodes < 1 || c.eval.max_steps < 1) {
    throw std::invalid_argument("config: eval.every >= 0, eval.episodes >= 1, eval.max_steps >= 1");
  }
  const auto type = get<std::string>(c.env, "type", "env");
  if (type != "puddle" && type != "recommender" && type != "cartpole" && type != "tabular") {
    throw std::invalid_argument("config: unknown env.type '" + type + "'");
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path,
                                        const std::vector<std::string>& overrides) {
  json doc = json::object();
  fs::path base;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("config " + path.string() + ": " + e.what());
    }
    base = fs::absolute(path).parent_path();
  }
  json merged = default_experiment_json();
  merge_into(merged, doc, "");
  for (const auto& o : overrides) apply_override(merged, o);
  return from_json(merged, base);
}

std::unique_ptr<Environment> make_environment(const json& env, const fs::path& base_dir) {
  const auto type = get<std::string>(env, "type", "env");
  if (type == "puddle") {
    const auto map_path = get<std::string>(env, "map", "env");
    PuddleMap map = map_path.empty()
                        ? PuddleMap::generate(get<int>(env, "rows", "env"), get<int>(env, "cols", "env"),
                                              get<std::uint64_t>(env, "map_seed", "env"))
                        : PuddleMap::load(resolve_path(map_path, base_dir));
    return std::make_unique<PuddleWorld>(std::move(map), get<int>(env, "plan_length", "env"),
                                         get<int>(env, "window_radius", "env"));
  }
  if (type == "recommender") {
    const auto data_path = get<std::string>(env, "data", "env");
    RecommenderData data =
        data_path.empty()
            ? synth_recommender(get<int>(env, "items", "env"), get<int>(env, "embed_dim", "env"),
                                get<int>(env, "neighbors_per_item", "env"),
                                get<std::uint64_t>(env, "data_seed", "env"))
            : RecommenderData::load(resolve_path(data_path, base_dir));
    RecommenderOptions opt;
    opt.accept_end_probability = get<double>(env, "accept_end_probability", "env");
    opt.reject_end_probability = get<double>(env, "reject_end_probability", "env");
    opt.guided_subset_size = get<int>(env, "guided_subset_size", "env");
    return std::make_unique<RecommenderSim>(std::move(data), opt);
  }
  if (type == "cartpole") {
    CartPoleParams params;
    params.force_max = get<double>(env, "force_max", "env");
    params.max_steps = get<int>(env, "max_steps", "env");
    return std::make_unique<CartPoleSwingUp>(get<int>(env, "actions", "env"), params);
  }
  if (type == "tabular") {
    const auto mdp = get<std::string>(env, "mdp", "env");
    if (mdp == "chain") return std::make_unique<TabularMdp>(chain_mdp());
    if (mdp == "two_state") return std::make_unique<TabularMdp>(two_state_mdp());
    throw std::invalid_argument("config: unknown env.mdp '" + mdp + "'");
  }
  throw std::invalid_argument("config: unknown env.type '" + type + "'");
}

CsvTable RunMetrics::metrics_csv() const {
  CsvTable t;
  t.header = {"env_steps", "mean_return"};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.env_steps), format_double(r.mean_return)});
  return t;
}

CsvTable RunMetrics::timing_csv() const {
  CsvTable t;
  t.header = {"env_steps", "wall_seconds", "median_steps_per_sec"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.env_steps), format_double(r.wall_seconds),
                      format_double(r.median_steps_per_sec)});
  }
  return t;
}

namespace {

struct Session {
  std::unique_ptr<Environment> env;
  std::shared_ptr<const ActionIndex> index;
  std::unique_ptr<WolpertingerPolicy> policy;
};

Session open_session(const ExperimentConfig& config) {
  Session s;
  s.env = make_environment(config.env, config.base_dir);
  s.index = build_index(s.env->action_set(), config.index, derive_seed(config.seed, 11));
  s.policy = std::make_unique<WolpertingerPolicy>(s.index, config.policy);
  return s;
}

std::uint64_t eval_seed(const ExperimentConfig& config) { return derive_seed(config.seed, 13); }

void write_checkpoint(const fs::path& dir, const ExperimentConfig& config, const Agent& agent,
                      const TrainingLog& log) {
  fs::create_directories(dir);
  nn::save_snapshot(dir / "actor.wolp", agent.actor);
  nn::save_snapshot(dir / "critic.wolp", agent.critic);
  json manifest;
  manifest["config"] = config.document;
  manifest["base_dir"] = config.base_dir.string();
  manifest["env_steps"] = log.env_steps;
  manifest["updates"] = log.updates;
  manifest["actor_hash"] = nn::parameter_hash(agent.actor);
  manifest["critic_hash"] = nn::parameter_hash(agent.critic);
  write_json(dir / "manifest.json", manifest);
}

}  // namespace

RunMetrics run_experiment(const ExperimentConfig& config) {
  Session s = open_session(config);
  Rng init(derive_seed(config.seed, 12));
  Agent agent = Agent::create(s.env->observation_dim(), *s.env->action_set(), config.trainer, init);

  RunMetrics metrics;
  const auto start = Clock::now();
  std::vector<double> step_seconds;
  auto evaluate = [&](const Agent& a, std::int64_t steps) {
    const auto actor_hash = nn::parameter_hash(a.actor);
    const auto critic_hash = nn::parameter_hash(a.critic);
    const auto returns = evaluate_policy(*s.env, a.actor, a.critic, *s.policy, config.eval.episodes,
                                         config.eval.max_steps, eval_seed(config));
    if (nn::parameter_hash(a.actor) != actor_hash || nn::parameter_hash(a.critic) != critic_hash) {
      throw std::logic_error("evaluation modified network parameters");
    }
    MetricsRow row;
    row.env_steps = steps;
    row.mean_return = mean(returns);
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const double med = median(step_seconds);
    row.median_steps_per_sec = med > 0.0 ? 1.0 / med : 0.0;
    step_seconds.clear();
    metrics.rows.push_back(row);
  };

  evaluate(agent, 0);
  TrainHooks hooks;
  hooks.eval_every = config.eval.every;
  hooks.on_eval = evaluate;
  hooks.on_step = [&](std::int64_t, double seconds) { step_seconds.push_back(seconds); };

  auto write_outputs = [&] {
    if (config.out.empty()) return;
    fs::create_directories(config.out);
    write_csv_file(config.out / "metrics.csv", metrics.metrics_csv());
    write_csv_file(config.out / "timing.csv", metrics.timing_csv());
    write_csv_file(config.out / "training_log.csv", metrics.log.to_csv(false));
    write_checkpoint(config.out / "checkpoint", config, agent, metrics.log);
  };

  try {
    metrics.log = train(*s.env, agent, *s.policy, config.trainer, hooks);
  } catch (const TrainingAborted& e) {
    metrics.log = e.log();
    write_outputs();
    throw;
  }
  const std::int64_t last = metrics.log.env_steps;
  if (last > 0 && metrics.rows.back().env_steps != last) evaluate(agent, last);
  write_outputs();
  return metrics;
}

CsvTable SweepResult::merged_csv(const std::string& source) const {
  CsvTable t;
  t.header = {"k", "tier", "env_steps", "mean_return", "status", "source"};
  for (const auto& c : cells) {
    const std::string status = c.ok ? "ok" : "failed: " + sanitize(c.error);
    if (c.metrics.rows.empty()) {
      t.rows.push_back({c.k, to_string(c.tier), "", "", status, source});
    }
    for (const auto& r : c.metrics.rows) {
      t.rows.push_back({c.k, to_string(c.tier), std::to_string(r.env_steps),
                        format_double(r.mean_return), status, source});
    }
  }
  return t;
}

CsvTable SweepResult::timing_csv() const {
  CsvTable t;
  t.header = {"k", "tier", "env_steps", "wall_seconds", "median_steps_per_sec"};
  for (const auto& c : cells) {
    for (const auto& r : c.metrics.rows) {
      t.rows.push_back({c.k, to_string(c.tier), std::to_string(r.env_steps),
                        format_double(r.wall_seconds), format_double(r.median_steps_per_sec)});
    }
  }
  return t;
}

bool SweepResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.ok; });
}

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<std::string>& k_list,
                      const std::vector<IndexTier>& tiers) {
  SweepResult result;
  for (const auto& k : k_list) {
    for (IndexTier tier : tiers) {
      SweepCell cell;
      cell.k = k;
      cell.tier = tier;
      result.cells.push_back(cell);
    }
  }
  const auto n = static_cast<int>(result.cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    SweepCell& cell = result.cells[static_cast<std::size_t>(i)];
    try {
      json doc = base.document;
      doc["policy"]["k"] = cell.k;
      doc["policy"]["tier"] = to_string(cell.tier);
      doc["out"] = base.out.empty()
                       ? std::string()
                       : (base.out / ("k" + cell.k + "_" + to_string(cell.tier))).string();
      const ExperimentConfig cfg = ExperimentConfig::from_json(doc, base.base_dir);
      cell.metrics = run_experiment(cfg);
      cell.ok = true;
    } catch (const TrainingAborted& e) {
      cell.metrics.log = e.log();
      cell.error = e.what();
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }
  if (!base.out.empty()) {
    fs::create_directories(base.out);
    const auto type = get<std::string>(base.env, "type", "env");
    write_csv_file(base.out / "sweep.csv",
                   result.merged_csv(type == "recommender" ? "synthetic-structure" : "simulated"));
    write_csv_file(base.out / "sweep_timing.csv", result.timing_csv());
  }
  return result;
}

LemmaReport run_lemma_report(const LemmaGrid& grid) {
  LemmaReport report;
  report.csv.header = {"p", "b", "c", "k", "expected_max", "mc_mean", "mc_se", "marginal_gain"};
  std::vector<int> ks = grid.k;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  std::uint64_t stream = 0;
  for (double p : grid.p) {
    for (const auto& [b, c] : grid.bc) {
      lemma::LemmaScenario base{p, b, c, ks.empty() ? 1 : ks.front(), grid.q};
      base.validate();
      if (ks.empty()) continue;
      for (const auto& point : lemma::diminishing_returns_curve(base, ks)) {
        lemma::LemmaScenario s = base;
        s.k = point.k;
        const auto mc = lemma::monte_carlo_max(s, grid.samples, derive_seed(grid.seed, stream++));
        const double diff = std::abs(point.expected_max - mc.mean);
        const bool agree = mc.standard_error > 0.0 ? diff <= grid.tolerance_se * mc.standard_error
                                                   : diff <= 1e-12;
        const bool forms_agree =
            std::abs(point.expected_max - lemma::expected_max_grouped(s)) <= 1e-12;
        ++report.cells;
        if (agree && forms_agree) ++report.passed;
        report.csv.rows.push_back({format_double(p), format_double(b), format_double(c),
                                   std::to_string(point.k), format_double(point.expected_max),
                                   format_double(mc.mean), format_double(mc.standard_error),
                                   format_double(point.marginal_gain)});
      }
    }
  }
  return report;
}

std::vector<RecallRow> run_recall_benchmark(std::shared_ptr<const ActionSet> actions,
                                            const std::vector<IndexTier>& tiers, int k,
                                            int queries, std::uint64_t seed) {
  std::vector<RecallRow> rows;
  for (IndexTier tier : tiers) {
    const auto t0 = Clock::now();
    const auto index = build_index(actions, IndexConfig::for_tier(tier), derive_seed(seed, 1));
    const auto t1 = Clock::now();
    const double recall = measure_recall(*index, *actions, queries, k, derive_seed(seed, 2));
    const auto t2 = Clock::now();
    rows.push_back({tier, recall, std::chrono::duration<double>(t1 - t0).count(),
                    std::chrono::duration<double>(t2 - t1).count()});
  }
  return rows;
}

std::vector<double> evaluate_checkpoint(const fs::path& checkpoint_dir, int episodes) {
  std::ifstream in(checkpoint_dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + checkpoint_dir.string());
  const json manifest = json::parse(in);
  const ExperimentConfig config = ExperimentConfig::from_json(
      manifest.at("config"), fs::path(manifest.at("base_dir").get<std::string>()));
  Session s = open_session(config);
  const nn::Mlp actor = nn::load_snapshot(checkpoint_dir / "actor.wolp");
  const nn::Mlp critic = nn::load_snapshot(checkpoint_dir / "critic.wolp");
  if (nn::parameter_hash(actor) != manifest.at("actor_hash").get<std::uint64_t>() ||
      nn::parameter_hash(critic) != manifest.at("critic_hash").get<std::uint64_t>()) {
    throw std::runtime_error("checkpoint snapshots do not match manifest hashes");
  }
  return evaluate_policy(*s.env, actor, critic, *s.policy,
                         episodes > 0 ? episodes : config.eval.episodes, config.eval.max_steps,
                         eval_seed(config));
}

}  // namespace wolp::harness
