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

#include "wolp/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wolp {

TabularMdp::TabularMdp(Spec spec) : spec_(std::move(spec)) {
  const int n = spec_.num_states;
  const int a = spec_.actions.size();
  if (n < 1 || a < 1) throw std::invalid_argument("TabularMdp: need states and actions");
  require_dim(spec_.next_state.size(), static_cast<std::size_t>(n), "TabularMdp next_state");
  require_dim(spec_.reward.size(), static_cast<std::size_t>(n), "TabularMdp reward");
  require_dim(spec_.terminal.size(), static_cast<std::size_t>(n), "TabularMdp terminal");
  for (int s = 0; s < n; ++s) {
    require_dim(spec_.next_state[s].size(), static_cast<std::size_t>(a), "TabularMdp next_state row");
    require_dim(spec_.reward[s].size(), static_cast<std::size_t>(a), "TabularMdp reward row");
    for (int t : spec_.next_state[s])
      if (t < 0 || t >= n) throw std::invalid_argument("TabularMdp: successor out of range");
  }
  if (spec_.start_state < 0 || spec_.start_state >= n) {
    throw std::invalid_argument("TabularMdp: bad start state");
  }
  actions_ = std::make_shared<const ActionSet>(spec_.actions);
  state_ = spec_.start_state;
}

Vector TabularMdp::observe(int state) const {
  Vector o = Vector::Zero(spec_.num_states);
  o(state) = 1.0;
  return o;
}

Vector TabularMdp::reset() {
  state_ = spec_.start_state;
  done_ = false;
  return observe(state_);
}

EnvStep TabularMdp::step(ActionId action) {
  if (done_) throw std::logic_error("TabularMdp::step: episode has ended");
  if (!actions_->contains(action)) throw DimensionError("TabularMdp::step: invalid action");
  EnvStep out;
  out.reward = spec_.reward[state_][action];
  state_ = spec_.next_state[state_][action];
  out.terminal = spec_.terminal[state_];
  done_ = out.terminal;
  out.observation = observe(state_);
  return out;
}

std::unique_ptr<Environment> TabularMdp::clone() const {
  return std::make_unique<TabularMdp>(*this);
}

ValueIterationResult value_iteration(const TabularMdp::Spec& spec, double gamma,
                                     double tolerance, int max_sweeps) {
  const int n = spec.num_states;
  const int na = spec.actions.size();
  ValueIterationResult r;
  r.value.assign(static_cast<std::size_t>(n), 0.0);
  r.q.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(na), 0.0));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int s = 0; s < n; ++s) {
      if (spec.terminal[s]) continue;  // absorbing
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < na; ++a) {
        const int t = spec.next_state[s][a];
        const double cont = spec.terminal[t] ? 0.0 : gamma * r.value[t];
        r.q[s][a] = spec.reward[s][a] + cont;
        best = std::max(best, r.q[s][a]);
      }
      delta = std::max(delta, std::abs(best - r.value[s]));
      r.value[s] = best;
    }
    if (delta < tolerance) break;
  }
  return r;
}

double optimal_return(const TabularMdp::Spec& spec, double gamma, int horizon) {
  const auto vi = value_iteration(spec, gamma);
  TabularMdp env(spec);
  env.reset();
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const auto& q = vi.q[env.state()];
    const auto best = static_cast<ActionId>(std::max_element(q.begin(), q.end()) - q.begin());
    const EnvStep st = env.step(best);
    total += st.reward;
    if (st.terminal) break;
  }
  return total;
}

TabularMdp::Spec two_state_mdp() {
  TabularMdp::Spec s;
  s.num_states = 2;
  s.actions = ActionSet(1, {-1.0, 1.0});
  s.next_state = {{0, 1}, {0, 1}};
  s.reward = {{1.0, 1.0}, {1.0, 1.0}};
  s.terminal = {false, false};
  s.start_state = 0;
  return s;
}

TabularMdp::Spec chain_mdp() {
  constexpr int kStates = 5;
  const int moves[] = {-1, 0, 1, 2};
  TabularMdp::Spec s;
  s.num_states = kStates;
  s.actions = ActionSet(1, {-1.0, 0.0, 1.0, 2.0});
  s.next_state.assign(kStates, std::vector<int>(4));
  s.reward.assign(kStates, std::vector<double>(4));
  s.terminal.assign(kStates, false);
  s.terminal[kStates - 1] = true;
  for (int st = 0; st < kStates; ++st) {
    for (int a = 0; a < 4; ++a) {
      const int t = std::clamp(st + moves[a], 0, kStates - 1);
      s.next_state[st][a] = t;
      s.reward[st][a] = (t == kStates - 1) ? 10.0 : -1.0;
    }
  }
  return s;
}

}  // namespace wolp
