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

// Acceptance suite. Prints one "criterion N: <name> PASS|FAIL" line per
// criterion. With arguments, runs only the listed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wolp/cartpole.hpp"
#include "wolp/ddpg.hpp"
#include "wolp/harness.hpp"
#include "wolp/kernels.hpp"
#include "wolp/lemma.hpp"
#include "wolp/policy.hpp"
#include "wolp/puddle_world.hpp"
#include "wolp/tabular.hpp"

namespace fs = std::filesystem;
using namespace wolp;
using namespace wolp::harness;

namespace {

const fs::path kSourceDir = WOLP_SOURCE_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("wolp_acceptance_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig config(const std::string& name, std::vector<std::string> overrides = {}) {
  return ExperimentConfig::load(kSourceDir / "configs" / name, overrides);
}

Vector uniform_vector(int n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

std::shared_ptr<ActionSet> uniform_actions(int count, int dim, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(static_cast<std::size_t>(count) * dim);
  for (double& x : values) x = u(rng);
  return std::make_shared<ActionSet>(dim, std::move(values));
}

bool grad_close(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
  return std::abs(analytic - numeric) <= 1e-4 * scale;
}

// ---------------------------------------------------------------------------

bool lemma_fidelity() {
  const auto t0 = Clock::now();
  const LemmaReport r = run_lemma_report(LemmaGrid{});
  std::cout << "  " << r.passed << "/" << r.cells << " cells within 4 SE of 1e6-sample Monte Carlo ("
            << seconds_since(t0) << " s)\n";
  return r.cells >= 15 && r.all_pass();
}

bool asymptote_and_gap() {
  const LemmaGrid g;
  double worst_ratio = 0.0, worst_gap_error = 0.0;
  for (auto [b, c] : g.bc) {
    for (double p : g.p) {
      if (p <= 0.5) {
        const lemma::LemmaScenario s{p, b, c, 1000, 0.0};
        worst_ratio = std::max(worst_ratio, ((s.q + s.b) - lemma::expected_max(s)) / b);
      }
      for (int k : g.k) {
        for (double q : {0.0, 1.5}) {
          const lemma::LemmaScenario s{p, b, c, k, q};
          const double gap = std::pow(p, k) * (c - b) +
                             2.0 * b / (k + 1) * (1.0 - std::pow(p, k + 1)) / (1.0 - p);
          worst_gap_error = std::max(worst_gap_error, std::abs((q + b) - lemma::expected_max(s) - gap));
        }
      }
    }
  }
  std::cout << "  max gap/b at k=1000 (p<=0.5): " << worst_ratio
            << "; max decomposition error: " << worst_gap_error << "\n";
  return worst_ratio < 0.01 && worst_gap_error <= 1e-12;
}

bool knn_correctness() {
  int mismatches = 0, queries = 0;
  for (int dim : {2, 8, 32}) {
    Rng rng(derive_seed(3, static_cast<std::uint64_t>(dim)));
    const auto a = uniform_actions(1000, dim, rng);
    const auto index = build_index(a, IndexConfig::for_tier(IndexTier::kExact), 0);
    for (int k : {1, 5, 20}) {
      for (int q = 0; q < 100; ++q) {
        const Vector query = uniform_vector(dim, rng, 0.0, 1.0);
        std::vector<std::pair<double, ActionId>> all;
        for (ActionId id = 0; id < a->size(); ++id) {
          double d = 0.0;
          for (int j = 0; j < dim; ++j) d += ((*a)[id][j] - query(j)) * ((*a)[id][j] - query(j));
          all.emplace_back(d, id);
        }
        std::sort(all.begin(), all.end());
        const NeighborResult got = index->query(query, k);
        bool same = got.size() == static_cast<std::size_t>(k);
        for (int i = 0; same && i < k; ++i) same = got[i].id == all[i].second;
        mismatches += !same;
        ++queries;
      }
    }
  }
  std::cout << "  " << queries - mismatches << "/" << queries << " queries identical to brute force\n";
  return mismatches == 0;
}

bool recall_ordering() {
  std::map<IndexTier, std::vector<double>> recalls;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(derive_seed(seed, 40));
    const auto a = uniform_actions(13138, 20, rng);
    for (const RecallRow& r : run_recall_benchmark(
             a, {IndexTier::kSlow, IndexTier::kMedium, IndexTier::kFast}, 10, 1000, seed)) {
      recalls[r.tier].push_back(r.recall);
    }
  }
  const double slow = median(recalls[IndexTier::kSlow]);
  const double medium = median(recalls[IndexTier::kMedium]);
  const double fast = median(recalls[IndexTier::kFast]);
  std::cout << "  median recall@10: slow " << slow << ", medium " << medium << ", fast " << fast << "\n";
  return slow >= medium && medium >= fast && slow >= 0.9 && fast <= slow - 0.05;
}

bool speed_scaling() {
  const int n = 1000000;
  auto actions = std::make_shared<const ActionSet>(cartpole_action_set(n, 10.0));
  Rng rng(5);
  nn::Mlp actor = nn::Mlp::random({6, 64, 64, 1}, nn::Activation::kRelu, nn::Activation::kTanh, rng);
  actor.set_output_bounds(actions->lower_bound(), actions->upper_bound());
  const nn::Mlp critic =
      nn::Mlp::random({7, 64, 64, 1}, nn::Activation::kRelu, nn::Activation::kIdentity, rng);
  const WolpertingerPolicy fast(build_index(actions, IndexConfig::for_tier(IndexTier::kFast), 1),
                                {KSpec::absolute(1), true});
  CartPoleSwingUp env(3);
  env.seed(9);
  std::vector<Vector> states;
  for (int i = 0; i < 200; ++i) states.push_back(env.reset());

  std::vector<double> wolp_times, full_times;
  ActionId sink = 0;
  for (const Vector& s : states) {
    const auto t0 = Clock::now();
    sink += fast.select(actor, critic, s).chosen;
    wolp_times.push_back(seconds_since(t0));
  }
  for (int i = 0; i < 15; ++i) {
    const auto t0 = Clock::now();
    sink += full_argmax_action(critic, states[static_cast<std::size_t>(i)], *actions, true).chosen;
    full_times.push_back(seconds_since(t0));
  }
  const double wolp = median(wolp_times), full = median(full_times);
  std::cout << "  median step: k=1 fast " << wolp * 1e6 << " us (" << 1.0 / wolp
            << " steps/s), full argmax " << full * 1e3 << " ms (" << 1.0 / full
            << " steps/s), ratio " << full / wolp << " [" << (sink % 2) << "]\n";
  return full / wolp >= 20.0;
}

bool gradient_integrity() {
  Rng rng(2024);
  std::uniform_int_distribution<int> width(2, 16), depth(1, 3), coin(0, 1);
  int failures = 0, checked = 0;
  for (int c = 0; c < 100; ++c) {
    // Network backward pass.
    std::vector<int> sizes{width(rng)};
    const int layers = depth(rng);
    for (int l = 0; l < layers; ++l) sizes.push_back(width(rng));
    const auto hidden = coin(rng) ? nn::Activation::kTanh : nn::Activation::kRelu;
    const auto output = coin(rng) ? nn::Activation::kTanh : nn::Activation::kIdentity;
    const nn::Mlp net = nn::Mlp::random(sizes, hidden, output, rng);
    const Vector x = uniform_vector(sizes.front(), rng, -1.0, 1.0);
    const Vector w = uniform_vector(sizes.back(), rng, -1.0, 1.0);
    const nn::GradientBundle g = net.backward(x, w);
    auto objective = [&](const nn::Mlp& m, const Vector& in) { return m.forward(in).dot(w); };
    std::vector<double> analytic;
    for (int l = 0; l < net.num_layers(); ++l) {
      analytic.insert(analytic.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
      analytic.insert(analytic.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
    }
    const auto theta = net.flat_parameters();
    const double h = 1e-6;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      nn::Mlp m = net;
      auto p = theta;
      p[i] += h;
      m.set_flat_parameters(p);
      const double up = objective(m, x);
      p[i] -= 2 * h;
      m.set_flat_parameters(p);
      failures += !grad_close(analytic[i], (up - objective(m, x)) / (2 * h));
      ++checked;
    }
    for (int i = 0; i < x.size(); ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      failures += !grad_close(g.input(i), (objective(net, xp) - objective(net, xm)) / (2 * h));
      ++checked;
    }

    // Actor gradient chained through the critic.
    const int sd = width(rng) % 6 + 1, ad = width(rng) % 4 + 1;
    nn::Mlp actor = nn::Mlp::random({sd, width(rng), ad}, hidden, nn::Activation::kTanh, rng);
    actor.set_output_bounds(Vector::Constant(ad, -1.0), Vector::Constant(ad, 2.0));
    const nn::Mlp critic =
        nn::Mlp::random({sd + ad, width(rng), 1}, nn::Activation::kTanh, nn::Activation::kIdentity, rng);
    Matrix states(sd, 4);
    for (int j = 0; j < 4; ++j) states.col(j) = uniform_vector(sd, rng, -1.0, 1.0);
    auto mean_q = [&](const nn::Mlp& f) {
      return critic.forward_batch(critic_input(states, f.forward_batch(states))).mean();
    };
    const nn::GradientBundle ag = actor_policy_gradient(actor, critic, states);
    std::vector<double> a_analytic;
    for (int l = 0; l < actor.num_layers(); ++l) {
      a_analytic.insert(a_analytic.end(), ag.weights[l].data(), ag.weights[l].data() + ag.weights[l].size());
      a_analytic.insert(a_analytic.end(), ag.biases[l].data(), ag.biases[l].data() + ag.biases[l].size());
    }
    const auto phi = actor.flat_parameters();
    for (std::size_t i = 0; i < phi.size(); ++i) {
      nn::Mlp f = actor;
      auto p = phi;
      p[i] += h;
      f.set_flat_parameters(p);
      const double up = mean_q(f);
      p[i] -= 2 * h;
      f.set_flat_parameters(p);
      failures += !grad_close(a_analytic[i], (up - mean_q(f)) / (2 * h));
      ++checked;
    }
  }
  std::cout << "  " << checked - failures << "/" << checked
            << " partial derivatives within 1e-4 relative error over 100 cases\n";
  return failures == 0;
}

bool tabular_sanity() {
  ScratchDir dir("tabular");
  ExperimentConfig cfg = config("two_state.json");
  cfg.out = dir.path;
  const RunMetrics m = run_experiment(cfg);
  const nn::Mlp critic = nn::load_snapshot(dir.path / "checkpoint" / "critic.wolp");
  const auto spec = two_state_mdp();
  double worst = 0.0;
  for (int s = 0; s < spec.num_states; ++s) {
    for (ActionId a = 0; a < spec.actions.size(); ++a) {
      Vector in = Vector::Zero(spec.num_states + 1);
      in(s) = 1.0;
      in(spec.num_states) = spec.actions[a][0];
      worst = std::max(worst, std::abs(critic.forward(in)(0) - 10.0));
    }
  }
  std::cout << "  " << m.log.updates << " updates; max |Q - 10| = " << worst << "\n";
  return m.log.updates == 10000 && worst <= 0.05;
}

// Least-squares slope of y against its index.
double trend_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sx += i;
    sy += y[i];
    sxx += static_cast<double>(i) * i;
    sxy += i * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool puddle_learning() {
  const auto t0 = Clock::now();
  const ExperimentConfig base = config("puddle_20.json");
  const PuddleMap map = PuddleMap::load(base.base_dir / base.env.at("map").get<std::string>());
  const double optimum = puddle_optimal_return(map);
  std::vector<double> finals;
  for (int seed = 1; seed <= 5; ++seed) {
    const RunMetrics m = run_experiment(config("puddle_20.json", {"seed=" + std::to_string(seed)}));
    finals.push_back(m.final_return());
    std::cout << "  seed " << seed << ": initial " << m.rows.front().mean_return << ", final "
              << m.final_return() << " after " << m.rows.back().env_steps << " steps\n";
  }
  const double med = median(finals);
  const bool learned = med >= 0.8 * optimum && base.trainer.max_env_steps <= 200000;
  std::cout << "  20x20: median final " << med << " vs optimum " << optimum << " (threshold "
            << 0.8 * optimum << "), " << seconds_since(t0) << " s\n";

  const auto t1 = Clock::now();
  const ExperimentConfig smoke = config("puddle_50_smoke.json");
  const RunMetrics s = run_experiment(smoke);
  std::vector<double> returns;
  for (std::size_t i = 1; i < s.rows.size() && returns.size() < 50; ++i) returns.push_back(s.rows[i].mean_return);
  const double slope = trend_slope(returns);
  const bool smoke_ok = returns.size() == 50 && slope > 0.0;
  std::cout << "  2^20-action smoke run on 50x50: " << returns.size()
            << " evaluations, trend slope " << slope << " per evaluation, first "
            << returns.front() << ", last " << returns.back() << ", optimum "
            << puddle_optimal_return(PuddleMap::load(smoke.base_dir / smoke.env.at("map").get<std::string>()))
            << ", " << seconds_since(t1) << " s\n";
  return learned && smoke_ok;
}

bool diminishing_returns() {
  std::map<std::string, std::vector<double>> perf;
  for (int seed = 1; seed <= 5; ++seed) {
    const ExperimentConfig cfg = config("recommender_49.json", {"seed=" + std::to_string(seed)});
    const SweepResult r = run_sweep(cfg, {"1", "10%", "100%"}, {IndexTier::kExact});
    for (const SweepCell& c : r.cells) {
      if (!c.ok) {
        std::cout << "  cell k=" << c.k << " failed: " << c.error << "\n";
        return false;
      }
      perf[c.k].push_back(c.metrics.final_return());
      std::cout << "  seed " << seed << " k=" << c.k << ": " << c.metrics.final_return() << "\n";
    }
  }
  const double k1 = median(perf["1"]), k10 = median(perf["10%"]), kall = median(perf["100%"]);
  const double eps = 0.1 * std::abs(kall);
  std::cout << "  median final return: k=1 " << k1 << ", k=10% " << k10 << ", k=100% " << kall
            << " (eps " << eps << ")\n";
  return k1 <= k10 + eps && k10 >= kall - eps;
}

bool determinism() {
  bool same = true;
  for (const std::string name : {"chain.json", "recommender_49.json", "puddle_20.json"}) {
    ScratchDir a("det_a"), b("det_b");
    const std::vector<std::string> shorten{"trainer.max_env_steps=3000", "eval.every=1000"};
    auto ca = config(name, shorten);
    auto cb = config(name, shorten);
    ca.out = a.path;
    cb.out = b.path;
    run_experiment(ca);
    run_experiment(cb);
    for (const char* f : {"metrics.csv", "training_log.csv", "checkpoint/actor.wolp",
                          "checkpoint/critic.wolp"}) {
      const bool eq = fs::exists(a.path / f) && slurp(a.path / f) == slurp(b.path / f);
      if (!eq) std::cout << "  " << name << ": " << f << " differs\n";
      same = same && eq;
    }
  }
  {
    ScratchDir a("sweep_a"), b("sweep_b");
    auto ca = config("recommender_49.json", {"trainer.max_env_steps=2000", "eval.every=1000"});
    auto cb = ca;
    ca.out = a.path;
    cb.out = b.path;
    const auto ra = run_sweep(ca, {"1", "10%", "100%"}, {IndexTier::kExact, IndexTier::kFast});
    const auto rb = run_sweep(cb, {"1", "10%", "100%"}, {IndexTier::kExact, IndexTier::kFast});
    std::ostringstream sa, sb;
    write_csv(sa, ra.merged_csv("synthetic-structure"));
    write_csv(sb, rb.merged_csv("synthetic-structure"));
    const bool eq = sa.str() == sb.str();
    if (!eq) std::cout << "  sweep CSV differs\n";
    same = same && eq;
  }
  std::cout << "  reruns of chain, recommender, puddle and a 6-cell sweep: "
            << (same ? "byte-identical" : "DIFFERENT") << "\n";
  return same;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
  kernels::tune_allocator();
  const std::vector<Criterion> all{
      {1, "expected-max closed form matches Monte Carlo", lemma_fidelity},
      {2, "asymptote and gap decomposition", asymptote_and_gap},
      {3, "exact kNN equals brute force", knn_correctness},
      {4, "recall ordering across index tiers", recall_ordering},
      {5, "speed scaling at 1e6 actions", speed_scaling},
      {6, "gradient integrity", gradient_integrity},
      {7, "two-state critic fixed point", tabular_sanity},
      {8, "puddle world learning", puddle_learning},
      {9, "diminishing returns on the 49-item recommender", diminishing_returns},
      {10, "bit-identical reruns", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  bool ok = true;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      std::cout << "  error: " << e.what() << "\n";
    }
    std::cout << "criterion " << c.id << ": " << c.name << " " << (pass ? "PASS" : "FAIL") << std::endl;
    ok = ok && pass;
  }
  return ok ? 0 : 1;
}
