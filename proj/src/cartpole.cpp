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

#include "wolp/cartpole.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wolp {
namespace {

struct Derivative {
  double x, x_dot, theta, theta_dot;
};

Derivative dynamics(const CartPoleParams& p, const CartPoleState& s, double force) {
  const double total = p.cart_mass + p.pole_mass;
  const double l = s.half_length;
  const double sin_t = std::sin(s.theta), cos_t = std::cos(s.theta);
  const double temp = (force + p.pole_mass * l * s.theta_dot * s.theta_dot * sin_t) / total;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (l * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total));
  const double x_acc = temp - p.pole_mass * l * theta_acc * cos_t / total;
  return {s.x_dot, x_acc, s.theta_dot, theta_acc};
}

CartPoleState advance(const CartPoleState& s, const Derivative& d, double h) {
  CartPoleState out = s;
  out.x += h * d.x;
  out.x_dot += h * d.x_dot;
  out.theta += h * d.theta;
  out.theta_dot += h * d.theta_dot;
  return out;
}

}  // namespace

ActionSet cartpole_action_set(int count, double force_max) {
  if (count < 2) throw std::invalid_argument("cartpole_action_set: need at least 2 actions");
  std::vector<double> forces(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    forces[j] = -force_max + 2.0 * force_max * static_cast<double>(j) / (count - 1);
  }
  forces.front() = -force_max;
  forces.back() = force_max;
  return ActionSet(1, std::move(forces));
}

CartPoleSwingUp::CartPoleSwingUp(int num_actions, CartPoleParams params)
    : params_(params),
      actions_(std::make_shared<const ActionSet>(cartpole_action_set(num_actions, params.force_max))) {
  if (params_.dt <= 0 || params_.substeps < 1 || params_.max_steps < 1) {
    throw std::invalid_argument("CartPoleSwingUp: bad integration parameters");
  }
}

Vector CartPoleSwingUp::reset() {
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::uniform_real_distribution<double> length(params_.min_half_length, params_.max_half_length);
  state_ = CartPoleState{};
  state_.theta = std::numbers::pi + jitter(rng_);
  state_.theta_dot = 0.25 * jitter(rng_);
  state_.half_length = length(rng_);
  steps_ = 0;
  done_ = false;
  return observe();
}

void CartPoleSwingUp::set_state(const CartPoleState& s) {
  state_ = s;
  steps_ = 0;
  done_ = false;
}

CartPoleState CartPoleSwingUp::integrate(const CartPoleState& s, double force, double h) const {
  const Derivative k1 = dynamics(params_, s, force);
  const Derivative k2 = dynamics(params_, advance(s, k1, 0.5 * h), force);
  const Derivative k3 = dynamics(params_, advance(s, k2, 0.5 * h), force);
  const Derivative k4 = dynamics(params_, advance(s, k3, h), force);
  CartPoleState out = s;
  out.x += h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  out.x_dot += h / 6.0 * (k1.x_dot + 2 * k2.x_dot + 2 * k3.x_dot + k4.x_dot);
  out.theta += h / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
  out.theta_dot += h / 6.0 * (k1.theta_dot + 2 * k2.theta_dot + 2 * k3.theta_dot + k4.theta_dot);
  return out;
}

double CartPoleSwingUp::energy() const {
  const auto& s = state_;
  const double total = params_.cart_mass + params_.pole_mass;
  const double m = params_.pole_mass, l = s.half_length;
  return 0.5 * total * s.x_dot * s.x_dot + m * l * s.x_dot * s.theta_dot * std::cos(s.theta) +
         (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot +
         m * params_.gravity * l * std::cos(s.theta);
}

bool CartPoleSwingUp::rewarded() const {
  const double wrapped = std::remainder(state_.theta, 2.0 * std::numbers::pi);
  const double tol = params_.upright_tolerance_deg * std::numbers::pi / 180.0;
  const double center = params_.center_fraction * params_.track_half_length;
  return std::abs(wrapped) <= tol && std::abs(state_.x) <= center;
}

Vector CartPoleSwingUp::observe() const {
  Vector o(6);
  o << state_.x, state_.x_dot, std::sin(state_.theta), std::cos(state_.theta), state_.theta_dot,
      state_.half_length;
  return o;
}

EnvStep CartPoleSwingUp::step(ActionId action) {
  if (done_) throw std::logic_error("CartPoleSwingUp::step: episode has ended");
  if (!actions_->contains(action)) throw DimensionError("CartPoleSwingUp::step: invalid action");
  const double force = (*actions_)[action][0];
  const double h = params_.dt / params_.substeps;
  for (int i = 0; i < params_.substeps; ++i) {
    state_ = integrate(state_, force, h);
    if (std::abs(state_.x) > params_.track_half_length) {
      // Track end stop.
      state_.x = std::copysign(params_.track_half_length, state_.x);
      state_.x_dot = 0.0;
    }
  }
  ++steps_;
  EnvStep out;
  out.reward = rewarded() ? 1.0 : 0.0;
  out.truncated = steps_ >= params_.max_steps;
  done_ = out.truncated;
  out.observation = observe();
  if (!out.observation.allFinite()) throw NumericError("CartPoleSwingUp: state diverged");
  return out;
}

std::unique_ptr<Environment> CartPoleSwingUp::clone() const {
  return std::make_unique<CartPoleSwingUp>(*this);
}

}  // namespace wolp
