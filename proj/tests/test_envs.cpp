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

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wolp/cartpole.hpp"
#include "wolp/puddle_world.hpp"
#include "wolp/recommender.hpp"
#include "wolp/tabular.hpp"

namespace wolp {
namespace {

std::vector<Move> moves(const std::string& s) {
  std::vector<Move> m;
  for (char c : s) m.push_back(c == 'R' ? Move::kRight : Move::kDown);
  return m;
}

PuddleMap empty_map(int rows, int cols) {
  std::string ascii;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ascii += (r == 0 && c == 0) ? 'S' : (r == rows - 1 && c == cols - 1) ? 'G' : '.';
    }
    ascii += '\n';
  }
  return PuddleMap::parse(ascii);
}

// Enumerates every monotone path from the start.
double brute_force_best_path(const PuddleMap& map) {
  std::function<double(int, int)> go = [&](int r, int c) -> double {
    if (r == map.rows() - 1 && c == map.cols() - 1) return 0.0;
    double best = -1e300;
    if (r + 1 < map.rows()) best = std::max(best, puddle_reward(map.at(r + 1, c)).reward + go(r + 1, c));
    if (c + 1 < map.cols()) best = std::max(best, puddle_reward(map.at(r, c + 1)).reward + go(r, c + 1));
    return best;
  };
  return go(map.start().first, map.start().second);
}

TEST(Puddle, CellRewards) {
  EXPECT_EQ(puddle_reward(Cell::kEmpty).reward, -1.0);
  EXPECT_EQ(puddle_reward(Cell::kStart).reward, -1.0);
  EXPECT_EQ(puddle_reward(Cell::kPuddle).reward, -3.0);
  EXPECT_EQ(puddle_reward(Cell::kGoal).reward, 250.0);
  EXPECT_TRUE(puddle_reward(Cell::kGoal).terminal);
  EXPECT_FALSE(puddle_reward(Cell::kPuddle).terminal);
}

TEST(Puddle, TwoByTwoEitherPlanScores249) {
  const PuddleMap map = PuddleMap::parse("S.\n.G\n");
  for (const char* plan : {"RD", "DR"}) {
    PuddleWorld env(map, 2);
    env.reset();
    const EnvStep s = env.step(plan_to_id(moves(plan)));
    EXPECT_EQ(s.reward, 249.0);
    EXPECT_TRUE(s.terminal);
    EXPECT_THROW(env.step(0), std::logic_error);
  }
  EXPECT_EQ(puddle_optimal_return(map), 249.0);
}

TEST(Puddle, AllDownPlanHitsTheWall) {
  PuddleWorld env(empty_map(20, 20), 20);
  env.reset();
  const EnvStep s = env.step(0);
  EXPECT_EQ(s.reward, -20.0);
  EXPECT_FALSE(s.terminal);
  EXPECT_EQ(env.position(), (std::pair{19, 0}));
}

TEST(Puddle, PuddleCostsThree) {
  const PuddleMap map = PuddleMap::parse("SP.\n..G\n");
  PuddleWorld env(map, 3);
  env.reset();
  EXPECT_EQ(env.step(plan_to_id(moves("RRD"))).reward, -3.0 - 1.0 + 250.0);
  env.reset();
  EXPECT_EQ(env.step(plan_to_id(moves("DRR"))).reward, -1.0 - 1.0 + 250.0);
  EXPECT_EQ(puddle_optimal_return(map), 248.0);
}

TEST(Puddle, GoalEndsPlanEarly) {
  PuddleWorld env(PuddleMap::parse("SG\n"), 4);
  env.reset();
  const EnvStep s = env.step(plan_to_id(moves("RRRR")));
  EXPECT_EQ(s.reward, 250.0);
  EXPECT_TRUE(s.terminal);
}

TEST(Puddle, PlanEncodingIsABijection) {
  const int n = 8;
  for (ActionId id = 0; id < (1 << n); ++id) {
    const auto plan = plan_from_id(id, n);
    ASSERT_EQ(plan.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(plan_to_id(plan), id);
    const Vector e = encode_plan(plan, n);
    ASSERT_EQ(e.size(), 2 * n);
    for (int i = 0; i < n; ++i) EXPECT_EQ(e(2 * i) + e(2 * i + 1), 1.0);
    EXPECT_EQ(decode_plan(e), plan);
  }
  EXPECT_EQ(plan_to_id(moves("RDDDDDDD")), 128);
  EXPECT_EQ(plan_to_id(moves("DDDDDDDR")), 1);
}

TEST(Puddle, ActionSetMatchesEncoding) {
  const ActionSet a = plan_action_set(10);
  EXPECT_EQ(a.size(), 1024);
  EXPECT_EQ(a.dim(), 20);
  for (ActionId id : {0, 1, 513, 1023}) {
    EXPECT_EQ(a.embedding(id), encode_plan(plan_from_id(id, 10), 10));
  }
  EXPECT_EQ(plan_from_id((1 << 20) - 1, 20), std::vector<Move>(20, Move::kRight));
  EXPECT_THROW(plan_from_id(1 << 20, 20), DimensionError);
  EXPECT_THROW(plan_from_id(0, 0), DimensionError);
}

TEST(Puddle, EmptyFiftyByFiftyOptimum) {
  // 98 moves: 97 plain cells and the goal.
  EXPECT_EQ(puddle_optimal_return(empty_map(50, 50)), 153.0);
}

TEST(Puddle, DynamicProgramMatchesEnumeration) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const PuddleMap map = PuddleMap::generate(6, 7, seed);
    EXPECT_EQ(puddle_optimal_return(map), brute_force_best_path(map)) << "seed " << seed;
  }
}

TEST(Puddle, NoPlanBeatsTheOptimum) {
  const PuddleMap map = PuddleMap::generate(12, 12, 3);
  const double best = puddle_optimal_return(map);
  Rng rng(1);
  for (int episode = 0; episode < 500; ++episode) {
    PuddleWorld env(map, 4);
    env.reset();
    double ret = 0.0;
    for (int t = 0; t < 50; ++t) {
      const EnvStep s = env.step(std::uniform_int_distribution<ActionId>(0, 15)(rng));
      ret += s.reward;
      if (s.terminal) break;
    }
    EXPECT_LE(ret, best);
  }
}

TEST(Puddle, GeneratedMapsAreValidAndDeterministic) {
  const PuddleMap a = PuddleMap::generate(20, 20, 5);
  EXPECT_EQ(a.to_ascii(), PuddleMap::generate(20, 20, 5).to_ascii());
  EXPECT_NE(a.to_ascii(), PuddleMap::generate(20, 20, 6).to_ascii());
  EXPECT_EQ(a.at(0, 0), Cell::kStart);
  EXPECT_EQ(a.at(19, 19), Cell::kGoal);
}

TEST(Puddle, MapTextRoundTrip) {
  const PuddleMap a = PuddleMap::generate(9, 13, 2);
  test::TempDir dir("map");
  a.save(dir.path() / "m.txt");
  EXPECT_EQ(PuddleMap::load(dir.path() / "m.txt").to_ascii(), a.to_ascii());
  EXPECT_EQ(PuddleMap::parse(a.to_ascii()).to_ascii(), a.to_ascii());
}

TEST(Puddle, MapParseErrors) {
  EXPECT_THROW(PuddleMap::parse("S.\n.\n"), std::invalid_argument);
  EXPECT_THROW(PuddleMap::parse("S.\n.X\n"), std::invalid_argument);
  EXPECT_THROW(PuddleMap::parse("..\n.G\n"), std::invalid_argument);
  EXPECT_THROW(PuddleMap::parse("SS\n.G\n"), std::invalid_argument);
  EXPECT_THROW(PuddleMap::parse("SG\n..\n"), std::invalid_argument);
  EXPECT_THROW(PuddleMap::load("/nonexistent/map.txt"), std::runtime_error);
}

TEST(Puddle, WindowObservation) {
  PuddleWorld env(PuddleMap::parse("SP\n.G\n"), 1, 1);
  EXPECT_EQ(env.observation_dim(), 36);
  const Vector o = env.reset();
  ASSERT_EQ(o.size(), 36);
  EXPECT_EQ(o.sum(), 4.0);
  // Window cell (1, 1) is the agent's own cell: start.
  EXPECT_EQ(o(4 * 4 + static_cast<int>(Cell::kStart)), 1.0);
  EXPECT_EQ(o(5 * 4 + static_cast<int>(Cell::kPuddle)), 1.0);
  EXPECT_EQ(o(7 * 4 + static_cast<int>(Cell::kEmpty)), 1.0);
  EXPECT_EQ(o(8 * 4 + static_cast<int>(Cell::kGoal)), 1.0);
  EXPECT_EQ(o.head(16).sum(), 0.0);
}

RecommenderData tiny_catalogue(double w01) {
  RecommenderData d;
  d.num_items = 3;
  d.dim = 2;
  d.embeddings = {1, 0, 0, 1, -1, 0};
  d.rewards = {0.1, 0.7, 0.3};
  d.acceptance = {{{1, w01}}, {{0, 0.5}, {2, 0.25}}, {}};
  return d;
}

struct Tally {
  double terminal = 0.0;
  double accepted = 0.0;
};

Tally run_from_item0(double w01, int trials) {
  RecommenderSim sim(tiny_catalogue(w01));
  sim.seed(42);
  Tally t;
  for (int i = 0; i < trials; ++i) {
    sim.set_current_item(0);
    const EnvStep s = sim.step(1);
    t.terminal += s.terminal;
    t.accepted += sim.last_accepted();
    if (sim.last_accepted()) {
      EXPECT_EQ(s.reward, 0.7);
      EXPECT_EQ(sim.current_item(), 1);
    } else {
      EXPECT_EQ(s.reward, 0.0);
    }
  }
  t.terminal /= trials;
  t.accepted /= trials;
  return t;
}

TEST(Recommender, CertainAcceptance) {
  const int n = 100000;
  const Tally t = run_from_item0(1.0, n);
  EXPECT_EQ(t.accepted, 1.0);
  EXPECT_NEAR(t.terminal, 0.1, 3.0 * test::binomial_sigma(0.1, n));
}

TEST(Recommender, CertainRejection) {
  const int n = 100000;
  const Tally t = run_from_item0(0.0, n);
  EXPECT_EQ(t.accepted, 0.0);
  EXPECT_NEAR(t.terminal, 0.2, 3.0 * test::binomial_sigma(0.2, n));
}

TEST(Recommender, EmpiricalAcceptanceRate) {
  const int n = 100000;
  const Tally t = run_from_item0(0.3, n);
  EXPECT_NEAR(t.accepted, 0.3, 3.0 * test::binomial_sigma(0.3, n));
  const double end = 0.3 * 0.1 + 0.7 * 0.2;
  EXPECT_NEAR(t.terminal, end, 3.0 * test::binomial_sigma(end, n));
}

TEST(Recommender, RejectionJumpsUniformly) {
  RecommenderSim sim(tiny_catalogue(0.0));
  sim.seed(3);
  std::vector<int> counts(3, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    sim.set_current_item(0);
    sim.step(1);
    ++counts[sim.current_item()];
  }
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 3.0, 3.0 * test::binomial_sigma(1.0 / 3.0, n));
}

TEST(Recommender, ObservationAndGuidance) {
  RecommenderSim sim(tiny_catalogue(0.4), {0.1, 0.2, 1});
  sim.set_current_item(1);
  ASSERT_EQ(sim.guided_actions().size(), 1u);
  EXPECT_EQ(sim.guided_actions()[0], 0);
  sim.set_current_item(2);
  EXPECT_TRUE(sim.guided_actions().empty());
  sim.seed(1);
  const Vector o = sim.reset();
  EXPECT_EQ(o, sim.action_set()->embedding(sim.current_item()));
  EXPECT_THROW(sim.step(3), DimensionError);
}

TEST(Recommender, ValidationErrors) {
  EXPECT_NO_THROW(tiny_catalogue(0.6).validate());
  auto over = tiny_catalogue(0.6);
  over.acceptance[1] = {{0, 0.6}, {2, 0.5}};
  EXPECT_THROW(RecommenderSim{over}, std::invalid_argument);
  auto unsorted = tiny_catalogue(0.6);
  unsorted.acceptance[1] = {{2, 0.1}, {0, 0.1}};
  EXPECT_THROW(unsorted.validate(), std::invalid_argument);
  auto out_of_range = tiny_catalogue(0.6);
  out_of_range.acceptance[2] = {{3, 0.1}};
  EXPECT_THROW(out_of_range.validate(), std::invalid_argument);
  EXPECT_THROW(tiny_catalogue(1.5).validate(), std::invalid_argument);
  auto short_rewards = tiny_catalogue(0.6);
  short_rewards.rewards.pop_back();
  EXPECT_THROW(short_rewards.validate(), DimensionError);
}

TEST(Recommender, SynthIsDeterministicAndValid) {
  const auto a = synth_recommender(200, 8, 10, 7);
  const auto b = synth_recommender(200, 8, 10, 7);
  const auto c = synth_recommender(200, 8, 10, 8);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(a.acceptance, b.acceptance);
  EXPECT_EQ(a.rewards, b.rewards);
  EXPECT_NE(a.embeddings, c.embeddings);
  EXPECT_NO_THROW(a.validate());
  for (int i = 0; i < a.num_items; ++i) {
    EXPECT_EQ(a.acceptance[i].size(), 10u);
    double sum = 0.0;
    for (const auto& [j, w] : a.acceptance[i]) {
      EXPECT_NE(j, i);
      sum += w;
    }
    EXPECT_LT(sum, 1.0);
  }
  for (double r : a.rewards) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Recommender, SynthWithTwoItems) {
  const auto d = synth_recommender(2, 3, 20, 1);
  ASSERT_EQ(d.acceptance[0].size(), 1u);
  EXPECT_EQ(d.acceptance[0][0].first, 1);
  RecommenderSim sim(d);
  sim.seed(1);
  sim.reset();
  EXPECT_NO_THROW(sim.step(0));
}

TEST(Recommender, BinaryRoundTrip) {
  const auto d = synth_recommender(50, 4, 5, 3);
  test::TempDir dir("rec");
  d.save(dir.path() / "d.bin");
  const auto e = RecommenderData::load(dir.path() / "d.bin");
  EXPECT_EQ(e.num_items, d.num_items);
  EXPECT_EQ(e.dim, d.dim);
  EXPECT_EQ(e.embeddings, d.embeddings);
  EXPECT_EQ(e.acceptance, d.acceptance);
  EXPECT_EQ(e.rewards, d.rewards);

  std::ofstream(dir.path() / "bad.bin", std::ios::binary) << "WREX";
  EXPECT_THROW(RecommenderData::load(dir.path() / "bad.bin"), std::runtime_error);
  std::ifstream in(dir.path() / "d.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(dir.path() / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  EXPECT_THROW(RecommenderData::load(dir.path() / "short.bin"), std::runtime_error);
}

TEST(CartPole, ActionSetEndpointsExact) {
  for (int n : {2, 3, 7, 1000}) {
    const ActionSet a = cartpole_action_set(n, 10.0);
    EXPECT_EQ(a.size(), n);
    EXPECT_EQ(a[0][0], -10.0);
    EXPECT_EQ(a[n - 1][0], 10.0);
    for (int j = 1; j < n; ++j) EXPECT_GT(a[j][0], a[j - 1][0]);
  }
  EXPECT_EQ(cartpole_action_set(3, 10.0)[1][0], 0.0);
  EXPECT_THROW(cartpole_action_set(1, 10.0), std::invalid_argument);
}

TEST(CartPole, RewardRegion) {
  CartPoleSwingUp env(3);
  auto rewarded_at = [&](double x, double theta) {
    CartPoleState s;
    s.x = x;
    s.theta = theta;
    env.set_state(s);
    return env.rewarded();
  };
  EXPECT_TRUE(rewarded_at(0.0, 0.0));
  EXPECT_TRUE(rewarded_at(0.2, 4.9 * std::numbers::pi / 180));
  EXPECT_TRUE(rewarded_at(-0.1, 2.0 * std::numbers::pi - 0.05));
  EXPECT_FALSE(rewarded_at(0.0, 5.1 * std::numbers::pi / 180));
  EXPECT_FALSE(rewarded_at(0.25, 0.0));
  EXPECT_FALSE(rewarded_at(0.0, std::numbers::pi));

  CartPoleState up;
  env.set_state(up);
  EXPECT_EQ(env.step(1).reward, 1.0);
  up.theta = std::numbers::pi;
  env.set_state(up);
  EXPECT_EQ(env.step(1).reward, 0.0);
}

TEST(CartPole, EnergyConservedWithoutForce) {
  CartPoleParams p;
  p.dt = 0.001;
  CartPoleSwingUp env(3, p);
  CartPoleState s;
  s.theta = 2.0;
  s.theta_dot = 1.0;
  s.half_length = 0.6;
  env.set_state(s);
  // Independent energy oracle for a uniform rod on a cart.
  auto energy = [&](const CartPoleState& q) {
    const double m = p.pole_mass, l = q.half_length;
    const double vx = q.x_dot + l * std::cos(q.theta) * q.theta_dot;
    const double vy = -l * std::sin(q.theta) * q.theta_dot;
    const double inertia = m * (2 * l) * (2 * l) / 12.0;
    return 0.5 * p.cart_mass * q.x_dot * q.x_dot + 0.5 * m * (vx * vx + vy * vy) +
           0.5 * inertia * q.theta_dot * q.theta_dot + m * p.gravity * l * std::cos(q.theta);
  };
  const double e0 = energy(env.state());
  EXPECT_NEAR(env.energy(), e0, 1e-12);
  for (int t = 0; t < 400; ++t) env.step(1);
  EXPECT_LT(std::abs(env.state().x), p.track_half_length);
  EXPECT_NEAR(energy(env.state()), e0, 1e-6);
  EXPECT_NEAR(env.energy(), e0, 1e-6);
}

TEST(CartPole, ForcePushesCart) {
  CartPoleSwingUp env(3);
  env.set_state({});
  env.step(2);
  EXPECT_GT(env.state().x_dot, 0.0);
  env.set_state({});
  env.step(0);
  EXPECT_LT(env.state().x_dot, 0.0);
}

TEST(CartPole, TruncatesAtStepLimit) {
  CartPoleParams p;
  p.max_steps = 3;
  CartPoleSwingUp env(5, p);
  env.seed(1);
  const Vector o = env.reset();
  ASSERT_EQ(o.size(), 6);
  EXPECT_NEAR(std::abs(env.state().theta - std::numbers::pi), 0.0, 0.2);
  EXPECT_GE(env.state().half_length, p.min_half_length);
  EXPECT_LE(env.state().half_length, p.max_half_length);
  EXPECT_FALSE(env.step(2).truncated);
  EXPECT_FALSE(env.step(2).truncated);
  const EnvStep last = env.step(2);
  EXPECT_TRUE(last.truncated);
  EXPECT_FALSE(last.terminal);
  EXPECT_THROW(env.step(2), std::logic_error);
}

TEST(Tabular, TwoStateValues) {
  const auto spec = two_state_mdp();
  for (double gamma : {0.0, 0.5, 0.9}) {
    const auto vi = value_iteration(spec, gamma);
    for (const auto& row : vi.q)
      for (double q : row) EXPECT_NEAR(q, 1.0 / (1.0 - gamma), 1e-9);
  }
}

TEST(Tabular, ChainValues) {
  const auto spec = chain_mdp();
  const double g = 0.9;
  const auto vi = value_iteration(spec, g);
  EXPECT_NEAR(vi.value[2], 10.0, 1e-9);
  EXPECT_NEAR(vi.value[3], 10.0, 1e-9);
  EXPECT_NEAR(vi.value[1], -1.0 + g * 10.0, 1e-9);
  EXPECT_NEAR(vi.value[0], -1.0 + g * 10.0, 1e-9);
  EXPECT_NEAR(vi.q[0][0], -1.0 + g * vi.value[0], 1e-9);
  EXPECT_EQ(optimal_return(spec, g, 100), 9.0);
}

TEST(Tabular, EpisodeFollowsTransitions) {
  TabularMdp env(chain_mdp());
  const Vector o = env.reset();
  EXPECT_EQ(o, env.observe(0));
  EXPECT_EQ(o.sum(), 1.0);
  EXPECT_EQ(env.step(3).reward, -1.0);
  EXPECT_EQ(env.state(), 2);
  const EnvStep s = env.step(3);
  EXPECT_EQ(s.reward, 10.0);
  EXPECT_TRUE(s.terminal);
  EXPECT_THROW(env.step(0), std::logic_error);
  env.reset();
  env.step(0);
  EXPECT_EQ(env.state(), 0);
}

}  // namespace
}  // namespace wolp
