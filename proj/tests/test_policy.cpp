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
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wolp/kernels.hpp"
#include "wolp/policy.hpp"

namespace wolp {
namespace {

using nn::Activation;
using nn::Mlp;

struct Nets {
  Mlp actor;
  Mlp critic;
};

Nets random_nets(int state_dim, const ActionSet& actions, Rng& rng) {
  Nets n;
  n.actor = Mlp::random({state_dim, 16, actions.dim()}, Activation::kRelu, Activation::kTanh, rng);
  n.actor.set_output_bounds(actions.lower_bound(), actions.upper_bound());
  n.critic = Mlp::random({state_dim + actions.dim(), 16, 1}, Activation::kTanh,
                         Activation::kIdentity, rng);
  return n;
}

double critic_value(const Mlp& critic, const Vector& s, const ActionSet& actions, ActionId a) {
  Vector in(s.size() + actions.dim());
  in << s, actions.embedding(a);
  return critic.forward(in)(0);
}

WolpertingerPolicy make_policy(std::shared_ptr<const ActionSet> a, KSpec k,
                               IndexTier tier = IndexTier::kExact, bool refinement = true) {
  return WolpertingerPolicy(build_index(std::move(a), IndexConfig::for_tier(tier), 1),
                            {k, refinement});
}

TEST(KSpec, ParseAndResolve) {
  EXPECT_EQ(KSpec::parse("13").resolve(256), 13);
  EXPECT_EQ(KSpec::parse("5%").resolve(256), 13);
  EXPECT_EQ(KSpec::parse("0.5%").resolve(1000000), 5000);
  EXPECT_EQ(KSpec::parse("100%").resolve(49), 49);
  EXPECT_EQ(KSpec::parse("10%").resolve(49), 5);
  EXPECT_EQ(KSpec::parse("0.001%").resolve(49), 1);
  EXPECT_EQ(KSpec::parse("5%").to_string(), "5%");
  EXPECT_EQ(KSpec::parse("7").to_string(), "7");
  EXPECT_TRUE(KSpec::parse("1%").is_fraction());
}

TEST(KSpec, RejectsBadValues) {
  EXPECT_THROW(KSpec::parse("0"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse("-3"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse("150%"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse("0%"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse("abc"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse("4x"), std::invalid_argument);
  EXPECT_THROW(KSpec::parse(""), std::invalid_argument);
  EXPECT_THROW(KSpec::absolute(50).resolve(49), std::invalid_argument);
}

TEST(EpsilonSchedule, LinearAnnealThenFlat) {
  const EpsilonSchedule e;
  EXPECT_EQ(e.at(0, 1000), 1.0);
  EXPECT_NEAR(e.at(100, 1000), 0.525, 1e-15);
  EXPECT_EQ(e.at(200, 1000), 0.05);
  EXPECT_EQ(e.at(999, 1000), 0.05);
  EXPECT_EQ(e.at(0, 0), 0.05);
}

TEST(ProtoAction, ZeroActorGivesBoxCenter) {
  const auto a = std::make_shared<ActionSet>(ActionSet::from_rows({{0.0, -2.0}, {4.0, 2.0}}));
  Mlp actor({3, 2}, Activation::kRelu, Activation::kTanh);
  actor.set_output_bounds(a->lower_bound(), a->upper_bound());
  const Vector p = proto_action(actor, Vector::Ones(3));
  EXPECT_EQ(p, (Vector(2) << 2.0, 0.0).finished());
  EXPECT_THROW(proto_action(actor, Vector::Ones(2)), DimensionError);
}

TEST(ProtoAction, DeterministicAndMatchesForward) {
  Rng rng(1);
  const auto a = test::random_actions(20, 3, rng);
  const Nets n = random_nets(4, *a, rng);
  const Vector s = test::random_vector(4, rng);
  EXPECT_EQ(proto_action(n.actor, s), proto_action(n.actor, s));
  EXPECT_EQ(proto_action(n.actor, s), n.actor.forward(s));
}

TEST(Select, FullKExactIsGlobalArgmax) {
  Rng rng(2);
  const auto a = test::random_actions(49, 5, rng);
  const Nets n = random_nets(6, *a, rng);
  const auto policy = make_policy(a, KSpec::fraction(1.0));
  ASSERT_EQ(policy.k(), 49);
  for (int i = 0; i < 100; ++i) {
    const Vector s = test::random_vector(6, rng);
    ActionId best = 0;
    double best_q = critic_value(n.critic, s, *a, 0);
    for (ActionId id = 1; id < a->size(); ++id) {
      const double q = critic_value(n.critic, s, *a, id);
      if (q > best_q) {
        best_q = q;
        best = id;
      }
    }
    const PolicyDecision d = policy.select(n.actor, n.critic, s);
    EXPECT_EQ(d.chosen, best);
    EXPECT_NEAR(d.chosen_q, best_q, 1e-12);
    EXPECT_EQ(full_argmax_action(n.critic, s, *a).chosen, best);
  }
}

TEST(Select, KOneTakesNearestIgnoringCritic) {
  Rng rng(3);
  const auto a = test::random_actions(200, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  for (IndexTier tier : {IndexTier::kExact, IndexTier::kFast}) {
    const auto policy = make_policy(a, KSpec::absolute(1), tier);
    for (int i = 0; i < 20; ++i) {
      const Vector s = test::random_vector(3, rng);
      const PolicyDecision d = policy.select(n.actor, n.critic, s);
      EXPECT_EQ(d.chosen, policy.index().query(d.proto_action, 1)[0].id);
      EXPECT_TRUE(d.q_values.empty());
      EXPECT_TRUE(std::isnan(d.chosen_q));
    }
  }
}

TEST(Select, RefinementOffTakesNearest) {
  Rng rng(4);
  const auto a = test::random_actions(100, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(10), IndexTier::kExact, false);
  const Vector s = test::random_vector(3, rng);
  const PolicyDecision d = policy.select(n.actor, n.critic, s);
  EXPECT_EQ(d.chosen, d.candidates.front().id);
}

TEST(Select, CriticPicksBetterOfTwoCandidates) {
  const auto a = std::make_shared<ActionSet>(1, std::vector<double>{0.0, 0.5, 1.0});
  // Q(s, a) = 10 a: Q(s, 0) = 0, Q(s, 0.5) = 5.
  Mlp critic({2, 1}, Activation::kRelu);
  critic.weight(0) << 0.0, 10.0;
  const auto policy = make_policy(a, KSpec::absolute(2));
  const PolicyDecision d = policy.select_from_proto(critic, Vector::Zero(1), Vector::Constant(1, 0.1));
  ASSERT_EQ(d.candidates.size(), 2u);
  EXPECT_EQ(d.candidates[0].id, 0);
  EXPECT_EQ(d.candidates[1].id, 1);
  EXPECT_EQ(d.chosen, 1);
  EXPECT_DOUBLE_EQ(d.chosen_q, 5.0);
}

TEST(Select, QTiesGoToSmallerId) {
  const auto a = std::make_shared<ActionSet>(1, std::vector<double>{0.0, 1.0, 2.0, 3.0});
  Mlp critic({2, 1}, Activation::kRelu);  // constant 0
  const auto policy = make_policy(a, KSpec::absolute(3));
  const PolicyDecision d = policy.select_from_proto(critic, Vector::Zero(1), Vector::Constant(1, 2.2));
  EXPECT_EQ(d.chosen, 1);
}

TEST(Select, ChosenMaximizesCandidateQ) {
  Rng rng(5);
  const auto a = test::random_actions(500, 3, rng);
  const Nets n = random_nets(4, *a, rng);
  for (IndexTier tier : {IndexTier::kExact, IndexTier::kSlow, IndexTier::kMedium}) {
    const auto policy = make_policy(a, KSpec::absolute(25), tier);
    for (int i = 0; i < 30; ++i) {
      const Vector s = test::random_vector(4, rng);
      const PolicyDecision d = policy.select(n.actor, n.critic, s);
      ASSERT_EQ(d.q_values.size(), d.candidates.size());
      bool found = false;
      for (std::size_t j = 0; j < d.candidates.size(); ++j) {
        EXPECT_NEAR(d.q_values[j], critic_value(n.critic, s, *a, d.candidates[j].id), 1e-12);
        if (d.candidates[j].id == d.chosen) {
          found = true;
          EXPECT_EQ(d.q_values[j], d.chosen_q);
        }
        EXPECT_LE(d.q_values[j], d.chosen_q);
      }
      EXPECT_TRUE(found);
      EXPECT_TRUE(a->contains(d.chosen));
    }
  }
}

TEST(Select, LargerKNeverLowersChosenQ) {
  Rng rng(6);
  const auto a = test::random_actions(300, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto index = std::shared_ptr<const ActionIndex>(build_index(a, IndexConfig{}, 0));
  for (int i = 0; i < 30; ++i) {
    const Vector s = test::random_vector(3, rng);
    double prev = -std::numeric_limits<double>::infinity();
    for (int k : {1, 2, 5, 20, 100, 300}) {
      const WolpertingerPolicy p(index, {KSpec::absolute(k), true});
      const double q = critic_value(n.critic, s, *a, p.select(n.actor, n.critic, s).chosen);
      EXPECT_GE(q, prev) << "k=" << k;
      prev = q;
    }
  }
}

TEST(Select, BatchMatchesSingleDecisions) {
  Rng rng(7);
  const auto a = test::random_actions(400, 3, rng);
  const Nets n = random_nets(5, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(12), IndexTier::kSlow);
  const Matrix states = test::random_matrix(5, 16, rng);
  const auto batch = policy.select_batch(n.actor, n.critic, states);
  for (int c = 0; c < 16; ++c) {
    const PolicyDecision d = policy.select(n.actor, n.critic, states.col(c));
    EXPECT_EQ(batch.actions[c], d.chosen);
    EXPECT_NEAR(batch.q_values[c], d.chosen_q, 1e-12);
  }
}

TEST(Explore, NoEpsilonNoNoiseEqualsGreedy) {
  Rng rng(8);
  const auto a = test::random_actions(100, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(5));
  ExplorationParams explore;
  for (int i = 0; i < 20; ++i) {
    const Vector s = test::random_vector(3, rng);
    const PolicyDecision d = policy.select_explore(n.actor, n.critic, s, explore, {}, rng);
    EXPECT_EQ(d.chosen, policy.select(n.actor, n.critic, s).chosen);
    EXPECT_FALSE(d.explored);
  }
}

TEST(Explore, SingletonSupportAlwaysChosen) {
  Rng rng(9);
  const auto a = test::random_actions(20, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(3));
  ExplorationParams explore;
  explore.epsilon = 1.0;
  const std::vector<ActionId> support{7};
  for (int i = 0; i < 100; ++i) {
    const auto d = policy.select_explore(n.actor, n.critic, Vector::Zero(3), explore, support, rng);
    EXPECT_EQ(d.chosen, 7);
    EXPECT_TRUE(d.explored);
  }
}

TEST(Explore, UniformOverFullSupport) {
  Rng rng(10);
  const auto a = test::random_actions(10, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(3));
  ExplorationParams explore;
  explore.epsilon = 1.0;
  std::vector<int> counts(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    ++counts[policy.select_explore(n.actor, n.critic, Vector::Zero(3), explore, {}, rng).chosen];
  }
  const double sigma = test::binomial_sigma(0.1, draws);
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(draws), 0.1, 3.0 * sigma);
}

TEST(Explore, GaussianNoiseMovesProto) {
  Rng rng(11);
  const auto a = test::random_actions(100, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  const auto policy = make_policy(a, KSpec::absolute(1));
  ExplorationParams explore;
  explore.noise_sigma = Vector::Constant(2, 0.5);
  const Vector s = Vector::Zero(3);
  const Vector greedy = proto_action(n.actor, s);
  Vector mean = Vector::Zero(2);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    mean += policy.select_explore(n.actor, n.critic, s, explore, {}, rng).proto_action;
  }
  mean /= draws;
  EXPECT_LT((mean - greedy).cwiseAbs().maxCoeff(), 4.0 * 0.5 / std::sqrt(draws));
  explore.noise_sigma = Vector::Constant(3, 0.5);
  EXPECT_THROW(policy.select_explore(n.actor, n.critic, s, explore, {}, rng), DimensionError);
}

TEST(ScoreKernel, ParallelMatchesSerialBitwise) {
  Rng rng(12);
  const auto a = test::random_actions(10000, 2, rng);
  const Nets n = random_nets(3, *a, rng);
  std::vector<ActionId> ids(a->size());
  std::iota(ids.begin(), ids.end(), 0);
  const Vector s = test::random_vector(3, rng);
  const auto serial = kernels::score_actions_serial(n.critic, s, *a, ids);
  const auto parallel = kernels::score_actions_parallel(n.critic, s, *a, ids);
  EXPECT_EQ(serial, parallel);
  for (ActionId id : {0, 4095, 4096, 9999}) {
    EXPECT_NEAR(serial[id], critic_value(n.critic, s, *a, id), 1e-12);
  }
  EXPECT_EQ(full_argmax_action(n.critic, s, *a, true).chosen,
            full_argmax_action(n.critic, s, *a, false).chosen);
}

TEST(DecisionLog, WritesOneRowPerDecision) {
  std::ostringstream out;
  DecisionLog log(out);
  PolicyDecision d;
  d.proto_action = (Vector(2) << 0.5, -1.0).finished();
  d.candidates = {{3, 0.1}, {4, 0.2}};
  d.chosen = 4;
  d.chosen_q = 2.5;
  log.record(7, d);
  EXPECT_EQ(out.str(), "step,proto_action,candidates,chosen,chosen_q\n7,0.5;-1,2,4,2.5\n");
}

}  // namespace
}  // namespace wolp
