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

#ifndef WOLP_CARTPOLE_HPP_
#define WOLP_CARTPOLE_HPP_

#include "wolp/env.hpp"

namespace wolp {

struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double gravity = 9.81;
  double force_max = 10.0;
  double dt = 0.01;
  int substeps = 1;
  double track_half_length = 2.4;
  double min_half_length = 0.4;  // pole half-length sampled per episode
  double max_half_length = 0.7;
  int max_steps = 500;
  double upright_tolerance_deg = 5.0;
  double center_fraction = 0.1;  // rewarded share of the track
};

// Cart position/velocity, pole angle (0 = upright) and angular velocity, pole
// half-length.
struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  double half_length = 0.5;
};

// `count` forces equally spaced over [-force_max, force_max], endpoints exact.
ActionSet cartpole_action_set(int count, double force_max);

// Frictionless cart with a uniform rod, integrated with RK4.
class CartPoleSwingUp final : public Environment {
 public:
  explicit CartPoleSwingUp(int num_actions, CartPoleParams params = {});

  std::string name() const override { return "cartpole"; }
  // x, x_dot, sin(theta), cos(theta), theta_dot, half_length.
  int observation_dim() const override { return 6; }
  std::shared_ptr<const ActionSet> action_set() const override { return actions_; }
  void seed(std::uint64_t seed) override { rng_.seed(seed); }
  Vector reset() override;
  EnvStep step(ActionId action) override;
  std::unique_ptr<Environment> clone() const override;

  const CartPoleState& state() const { return state_; }
  void set_state(const CartPoleState& s);
  const CartPoleParams& params() const { return params_; }

  // Mechanical energy; conserved by the unforced dynamics.
  double energy() const;
  // One RK4 step of length h under constant force.
  CartPoleState integrate(const CartPoleState& s, double force, double h) const;
  bool rewarded() const;
  Vector observe() const;

 private:
  CartPoleParams params_;
  std::shared_ptr<const ActionSet> actions_;
  Rng rng_{0};
  CartPoleState state_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace wolp

#endif  // WOLP_CARTPOLE_HPP_
