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

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wolp/harness.hpp"
#include "wolp/kernels.hpp"

namespace fs = std::filesystem;
using namespace wolp;
using namespace wolp::harness;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Experiment JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Seed (overrides the config)");
  cmd->add_option("--out", flags.out, "Output directory (overrides the config)");
  cmd->add_option("--set", flags.overrides, "Override one key, e.g. --set trainer.tau=0.01")
      ->take_all();
}

ExperimentConfig load_config(const CommonFlags& flags) {
  std::vector<std::string> overrides = flags.overrides;
  if (flags.seed) overrides.push_back("seed=" + std::to_string(*flags.seed));
  if (!flags.out.empty()) overrides.push_back("out=\"" + flags.out + "\"");
  return ExperimentConfig::load(flags.config, overrides);
}

void print_rows(const RunMetrics& m) {
  for (const auto& r : m.rows) {
    std::cout << "  step " << r.env_steps << "  return " << format_double(r.mean_return)
              << "  steps/s " << format_double(r.median_steps_per_sec) << '\n';
  }
}

int cmd_train(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const RunMetrics m = run_experiment(cfg);
  print_rows(m);
  std::cout << "final mean return " << format_double(m.final_return()) << '\n';
  return 0;
}

int cmd_sweep(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const auto& sweep = cfg.document.at("sweep");
  std::vector<std::string> ks;
  for (const auto& k : sweep.at("k")) ks.push_back(k.is_string() ? k.get<std::string>() : k.dump());
  std::vector<IndexTier> tiers;
  for (const auto& t : sweep.at("tiers")) tiers.push_back(parse_tier(t.get<std::string>()));
  if (ks.empty() || tiers.empty()) throw std::invalid_argument("sweep: k and tiers must be non-empty");
  const SweepResult r = run_sweep(cfg, ks, tiers);
  for (const auto& c : r.cells) {
    std::cout << "k=" << c.k << " tier=" << to_string(c.tier) << ": ";
    if (c.ok) {
      std::cout << "final return " << format_double(c.metrics.final_return()) << '\n';
    } else {
      std::cout << "FAILED " << c.error << '\n';
    }
  }
  return r.all_ok() ? 0 : 1;
}

int cmd_lemma(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const auto& j = cfg.document.at("lemma");
  LemmaGrid grid;
  grid.p = j.at("p").get<std::vector<double>>();
  grid.k = j.at("k").get<std::vector<int>>();
  grid.bc.clear();
  for (const auto& pair : j.at("bc")) grid.bc.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  grid.q = j.at("q").get<double>();
  grid.samples = j.at("samples").get<std::int64_t>();
  grid.seed = j.at("seed").get<std::uint64_t>();
  grid.tolerance_se = j.at("tolerance_se").get<double>();
  const LemmaReport report = run_lemma_report(grid);
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    write_csv_file(cfg.out / "lemma.csv", report.csv);
  } else {
    write_csv(std::cout, report.csv);
  }
  std::cout << "lemma: " << report.passed << "/" << report.cells << " cells agree with Monte Carlo"
            << (report.all_pass() ? " PASS" : " FAIL") << '\n';
  return report.all_pass() ? 0 : 1;
}

int cmd_recall(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  const auto& j = cfg.document.at("recall");
  std::shared_ptr<const ActionSet> actions;
  const auto path = j.at("actions").get<std::string>();
  if (!path.empty()) {
    const fs::path p(path);
    actions = std::make_shared<ActionSet>(
        ActionSet::load_csv(p.is_absolute() || cfg.base_dir.empty() ? p : cfg.base_dir / p));
  } else {
    const int n = j.at("random").get<int>();
    const int dim = j.at("dim").get<int>();
    Rng rng(derive_seed(cfg.seed, 21));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> values(static_cast<std::size_t>(n) * dim);
    for (double& v : values) v = unit(rng);
    actions = std::make_shared<ActionSet>(dim, std::move(values));
  }
  std::vector<IndexTier> tiers;
  for (const auto& t : j.at("tiers")) tiers.push_back(parse_tier(t.get<std::string>()));
  const auto rows = run_recall_benchmark(actions, tiers, j.at("k").get<int>(),
                                         j.at("queries").get<int>(), cfg.seed);
  CsvTable recall, timing;
  recall.header = {"tier", "recall"};
  timing.header = {"tier", "build_seconds", "query_seconds"};
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    recall.rows.push_back({to_string(r.tier), format_double(r.recall)});
    timing.rows.push_back({to_string(r.tier), format_double(r.build_seconds), format_double(r.query_seconds)});
    std::cout << to_string(r.tier) << ": recall@" << j.at("k").get<int>() << " = "
              << format_double(r.recall) << '\n';
    if (!(r.recall >= 0.0 && r.recall <= 1.0)) ok = false;
    // Coarser tiers never beat finer ones.
    for (std::size_t m = 0; m < i; ++m) {
      if (rows[m].tier < r.tier && rows[m].recall < r.recall) ok = false;
    }
  }
  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    write_csv_file(cfg.out / "recall.csv", recall);
    write_csv_file(cfg.out / "recall_timing.csv", timing);
  }
  if (!ok) std::cout << "recall ordering violated\n";
  return ok ? 0 : 1;
}

int cmd_eval(const std::string& checkpoint, int episodes, const std::string& out) {
  const auto returns = evaluate_checkpoint(checkpoint, episodes);
  CsvTable t;
  t.header = {"episode", "return"};
  double sum = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    t.rows.push_back({std::to_string(i), format_double(returns[i])});
    sum += returns[i];
  }
  if (!out.empty()) {
    fs::create_directories(out);
    write_csv_file(fs::path(out) / "eval.csv", t);
  }
  std::cout << "episodes " << returns.size() << "  mean return "
            << format_double(returns.empty() ? 0.0 : sum / static_cast<double>(returns.size())) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wolpertinger policies over large discrete action sets"};
  app.require_subcommand(1);

  CommonFlags train_flags, sweep_flags, lemma_flags, recall_flags;
  auto* train = app.add_subcommand("train", "Train one experiment with periodic greedy evaluation");
  add_common(train, train_flags);
  auto* sweep = app.add_subcommand("sweep", "Run every (k, tier) cell of the sweep section");
  add_common(sweep, sweep_flags);
  auto* lemma = app.add_subcommand("lemma", "Closed-form vs Monte Carlo report on the lemma grid");
  add_common(lemma, lemma_flags);
  auto* recall = app.add_subcommand("recall", "Recall of the approximate index tiers");
  add_common(recall, recall_flags);

  std::string checkpoint, eval_out;
  int episodes = 0;
  auto* eval = app.add_subcommand("eval", "Greedy episodes from a saved checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--episodes", episodes, "Episodes (default: the run's eval.episodes)");
  eval->add_option("--out", eval_out, "Write eval.csv here");

  CLI11_PARSE(app, argc, argv);
  kernels::tune_allocator();
  try {
    if (*train) return cmd_train(train_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*lemma) return cmd_lemma(lemma_flags);
    if (*recall) return cmd_recall(recall_flags);
    if (*eval) return cmd_eval(checkpoint, episodes, eval_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
