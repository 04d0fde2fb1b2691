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

#ifndef WOLP_HARNESS_HPP_
#define WOLP_HARNESS_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "wolp/action_index.hpp"
#include "wolp/csv.hpp"
#include "wolp/ddpg.hpp"
#include "wolp/env.hpp"
#include "wolp/policy.hpp"

namespace wolp::harness {

using nlohmann::json;

// Every key an experiment file may set, with its default value.
json default_experiment_json();

// "a.b.c=value": value is parsed as JSON when possible, else kept as a string.
void apply_override(json& doc, const std::string& assignment);

struct EvalConfig {
  std::int64_t every = 5000;
  int episodes = 20;
  int max_steps = 100;
};

struct ExperimentConfig {
  json env;  // environment section, interpreted by make_environment
  PolicyConfig policy;
  IndexConfig index;
  TrainerConfig trainer;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // empty: write nothing
  std::filesystem::path base_dir;  // relative data paths resolve here
  json document;  // merged source, echoed into manifests

  // `doc` is merged over the defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const json& doc, std::filesystem::path base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path,
                               const std::vector<std::string>& overrides = {});
  json to_json() const { return document; }
};

std::unique_ptr<Environment> make_environment(const json& env,
                                              const std::filesystem::path& base_dir);

struct MetricsRow {
  std::int64_t env_steps = 0;
  double mean_return = 0.0;
  // Wall-clock.
  double wall_seconds = 0.0;
  double median_steps_per_sec = 0.0;
};

struct RunMetrics {
  std::vector<MetricsRow> rows;
  TrainingLog log;

  // env_steps, mean_return; deterministic per config and seed.
  CsvTable metrics_csv() const;
  // env_steps, wall_seconds, median_steps_per_sec.
  CsvTable timing_csv() const;
  double final_return() const { return rows.empty() ? 0.0 : rows.back().mean_return; }
};

// Train with periodic greedy evaluation (one row before training, then every
// eval.every steps, and one after the last step). Writes metrics.csv,
// timing.csv, training_log.csv and checkpoint/ under config.out when set.
RunMetrics run_experiment(const ExperimentConfig& config);

struct SweepCell {
  std::string k;
  IndexTier tier = IndexTier::kExact;
  bool ok = false;
  std::string error;
  RunMetrics metrics;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  // k, tier, env_steps, mean_return, status, source.
  CsvTable merged_csv(const std::string& source) const;
  // k, tier, env_steps, wall_seconds, median_steps_per_sec.
  CsvTable timing_csv() const;
  bool all_ok() const;
};

// One run per (k, tier) cell; cells run in parallel, a failing cell is
// recorded and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& base, const std::vector<std::string>& k_list,
                      const std::vector<IndexTier>& tiers);

struct LemmaGrid {
  std::vector<double> p{0.0, 0.1, 0.3, 0.5, 0.9};
  std::vector<int> k{1, 2, 5, 10, 50};
  std::vector<std::pair<double, double>> bc{{0.5, 0.5}, {0.5, 1.0}, {1.0, 2.0}};
  double q = 0.0;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 2017;
  double tolerance_se = 4.0;

  static LemmaGrid empty() { return {{}, {}, {}, 0.0, 1000000, 2017, 4.0}; }
};

struct LemmaReport {
  // p, b, c, k, expected_max, mc_mean, mc_se, marginal_gain.
  CsvTable csv;
  int cells = 0;
  int passed = 0;
  bool all_pass() const { return passed == cells; }
};

LemmaReport run_lemma_report(const LemmaGrid& grid);

struct RecallRow {
  IndexTier tier;
  double recall;
  double build_seconds;
  double query_seconds;
};
std::vector<RecallRow> run_recall_benchmark(std::shared_ptr<const ActionSet> actions,
                                            const std::vector<IndexTier>& tiers, int k,
                                            int queries, std::uint64_t seed);

// Greedy evaluation of a saved checkpoint directory.
std::vector<double> evaluate_checkpoint(const std::filesystem::path& checkpoint_dir,
                                        int episodes);

}  // namespace wolp::harness

#endif  // WOLP_HARNESS_HPP_
