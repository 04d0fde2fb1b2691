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

#ifndef WOLP_TABULAR_HPP_
#define WOLP_TABULAR_HPP_

#include <vector>

#include "wolp/env.hpp"

namespace wolp {

// Deterministic finite MDP with one-hot observations. Used as a ground-truth
// environment: value iteration gives the exact optimum.
class TabularMdp final : public Environment {
 public:
  struct Spec {
    int num_states = 0;
    ActionSet actions;
    std::vector<std::vector<int>> next_state;  // [state][action]
    std::vector<std::vector<double>> reward;   // [state][action]
    std::vector<bool> terminal;                // absorbing on entry
    int start_state = 0;
  };

  explicit TabularMdp(Spec spec);

  std::string name() const override { return "tabular"; }
  int observation_dim() const override { return spec_.num_states; }
  std::shared_ptr<const ActionSet> action_set() const override { return actions_; }
  void seed(std::uint64_t) override {}
  Vector reset() override;
  EnvStep step(ActionId action) override;
  std::unique_ptr<Environment> clone() const override;

  const Spec& spec() const { return spec_; }
  int state() const { return state_; }
  Vector observe(int state) const;

 private:
  Spec spec_;
  std::shared_ptr<const ActionSet> actions_;
  int state_ = 0;
  bool done_ = false;
};

struct ValueIterationResult {
  std::vector<double> value;               // [state]
  std::vector<std::vector<double>> q;      // [state][action]
};
ValueIterationResult value_iteration(const TabularMdp::Spec& spec, double gamma,
                                     double tolerance = 1e-12, int max_sweeps = 100000);

// Undiscounted return of the greedy optimal policy from the start state,
// capped at `horizon` steps.
double optimal_return(const TabularMdp::Spec& spec, double gamma, int horizon);

// Two states, two actions; action a moves to state a, reward 1, never ends.
// Q* = 1 / (1 - gamma) everywhere.
TabularMdp::Spec two_state_mdp();

// States 0..4 on a line, start 0, state 4 terminal. Actions move by
// {-1, 0, +1, +2} (clamped), embedded as that displacement. Every step
// costs -1; entering state 4 pays +10 instead.
TabularMdp::Spec chain_mdp();

}  // namespace wolp

#endif  // WOLP_TABULAR_HPP_
