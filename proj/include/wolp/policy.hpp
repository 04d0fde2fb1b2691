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

#ifndef WOLP_POLICY_HPP_
#define WOLP_POLICY_HPP_

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wolp/action_index.hpp"
#include "wolp/nn.hpp"

namespace wolp {

// Candidate count: an absolute k, or a fraction of |A| resolved as
// max(1, round(fraction * |A|)).
class KSpec {
 public:
  static KSpec absolute(int k);
  static KSpec fraction(double f);
  // "13" -> absolute, "5%" / "0.5%" -> fraction.
  static KSpec parse(const std::string& text);

  int resolve(ActionId num_actions) const;
  bool is_fraction() const { return fractional_; }
  double value() const { return value_; }
  std::string to_string() const;

 private:
  bool fractional_ = false;
  double value_ = 1.0;
};

struct PolicyConfig {
  KSpec k = KSpec::absolute(1);
  // Off: take the nearest candidate without consulting the critic.
  bool refinement = true;
};

struct PolicyDecision {
  Vector proto_action;
  NeighborResult candidates;
  std::vector<double> q_values;  // parallel to candidates; empty if not scored
  ActionId chosen = -1;
  double chosen_q = 0.0;         // NaN when the critic was not consulted
  bool explored = false;         // uniform random jump
};

struct ExplorationParams {
  double epsilon = 0.0;
  Vector noise_sigma;            // per embedding dimension; empty = no noise
  bool use_guided_support = true;
};

// Linear anneal from `start` to `end` over the first `fraction` of training.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double fraction = 0.2;
  double at(std::int64_t step, std::int64_t total_steps) const;
};

// Actor proto-action, k-nearest-neighbor lookup, critic re-ranking.
// Read-only after construction; concurrent selection is safe.
class WolpertingerPolicy {
 public:
  WolpertingerPolicy(std::shared_ptr<const ActionIndex> index, PolicyConfig config);

  const ActionSet& actions() const { return index_->actions(); }
  const ActionIndex& index() const { return *index_; }
  const PolicyConfig& config() const { return config_; }
  int k() const { return k_; }

  PolicyDecision select(const nn::Mlp& actor, const nn::Mlp& critic, const Vector& state) const;
  PolicyDecision select_from_proto(const nn::Mlp& critic, const Vector& state,
                                   const Vector& proto) const;
  PolicyDecision select_explore(const nn::Mlp& actor, const nn::Mlp& critic, const Vector& state,
                                const ExplorationParams& explore,
                                std::span<const ActionId> guided_support, Rng& rng) const;

  struct BatchChoice {
    std::vector<ActionId> actions;
    std::vector<double> q_values;  // critic value of each chosen action
  };
  // Full policy over a batch of states (one per column). The chosen action's
  // Q is always evaluated, also for k = 1. `k_override` > 0 replaces k.
  BatchChoice select_batch(const nn::Mlp& actor, const nn::Mlp& critic, const Matrix& states,
                           int k_override = 0) const;

 private:
  std::shared_ptr<const ActionIndex> index_;
  PolicyConfig config_;
  int k_;
};

Vector proto_action(const nn::Mlp& actor, const Vector& state);

// Greedy policy over the whole action set: argmax_a Q(state, a), ties to the
// smaller id.
PolicyDecision full_argmax_action(const nn::Mlp& critic, const Vector& state,
                                  const ActionSet& actions, bool parallel = false);

// Index of the largest value, ties to the smaller action id.
std::size_t argmax_by_id(std::span<const double> q, std::span<const Neighbor> candidates);

// CSV log of decisions: step, proto_action (';'-joined), candidates,
// chosen, chosen_q.
class DecisionLog {
 public:
  explicit DecisionLog(std::ostream& out);
  void record(std::int64_t step, const PolicyDecision& decision);

 private:
  std::ostream& out_;
};

}  // namespace wolp

#endif  // WOLP_POLICY_HPP_
