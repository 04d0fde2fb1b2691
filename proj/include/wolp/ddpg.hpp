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

#ifndef WOLP_DDPG_HPP_
#define WOLP_DDPG_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "wolp/csv.hpp"
#include "wolp/env.hpp"
#include "wolp/nn.hpp"
#include "wolp/policy.hpp"

namespace wolp {

struct Transition {
  Vector state;
  ActionId action = -1;
  Vector action_embedding;  // as stored in the ActionSet for `action`
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;
};

// Bounded FIFO with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // i = 0 is the oldest retained transition.
  const Transition& at(std::size_t i) const;

  // Throws std::logic_error when fewer than `n` transitions are stored.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> data_;
};

// Column-per-sample view of a minibatch.
struct Batch {
  Matrix states;
  Matrix actions;  // stored executed embeddings
  Vector rewards;
  Matrix next_states;
  std::vector<bool> terminal;

  static Batch gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices);
  static Batch from(const std::vector<Transition>& transitions);
  int size() const { return static_cast<int>(rewards.size()); }
};

struct TrainerConfig {
  double gamma = 0.99;
  double tau = 0.001;
  int minibatch_size = 64;
  std::size_t buffer_capacity = 100000;
  std::int64_t warmup_steps = 1000;
  // Training stops after `episodes` episodes or `max_env_steps` steps,
  // whichever comes first (0 = no limit on that axis; not both).
  std::int64_t episodes = 0;
  std::int64_t max_env_steps = 0;
  int steps_per_episode = 1000;
  double actor_learning_rate = 1e-4;
  double critic_learning_rate = 1e-3;
  std::vector<int> hidden_sizes{64, 64};
  double noise_fraction = 0.1;  // Gaussian sigma relative to the action box
  EpsilonSchedule epsilon;
  double reward_scale = 1.0;    // applied to stored rewards only
  int target_k = 0;             // 0: behaviour-policy k
  bool guided_exploration = true;
  std::uint64_t seed = 0;

  void validate() const;
  std::int64_t step_budget() const;
};

// Actor, critic, their target copies and optimizer state.
struct Agent {
  nn::Mlp actor;
  nn::Mlp critic;
  nn::Mlp target_actor;
  nn::Mlp target_critic;
  nn::Adam actor_optimizer;
  nn::Adam critic_optimizer;

  // Actor outputs are squashed into the bounding box of `actions`.
  static Agent create(int observation_dim, const ActionSet& actions, const TrainerConfig& config,
                      Rng& rng);
};

Matrix critic_input(const Matrix& states, const Matrix& actions);

// y_i = r_i + gamma * Q'(s'_i, pi'(s'_i)) with pi' the full policy on the
// target networks; terminal transitions give y_i = r_i.
Vector critic_targets(const Batch& batch, const nn::Mlp& target_actor,
                      const nn::Mlp& target_critic, const WolpertingerPolicy& policy, double gamma,
                      int k_override = 0);

// Action points actually fed to the networks during an update.
struct UpdateTrace {
  Matrix critic_actions;
  Matrix actor_gradient_points;
};

// One optimizer step on mean squared Bellman error at the stored actions.
// Returns the loss before the step.
double critic_update(nn::Mlp& critic, nn::Adam& optimizer, const Batch& batch,
                     const Vector& targets, UpdateTrace* trace = nullptr);

// Gradient of (1/N) sum_i Q(s_i, f(s_i)) with respect to the actor
// parameters, chaining dQ/da at a = f(s_i) through the actor.
nn::GradientBundle actor_policy_gradient(const nn::Mlp& actor, const nn::Mlp& critic,
                                         const Matrix& states, Matrix* action_points = nullptr);

// One ascent step along actor_policy_gradient. Returns its L2 norm.
double actor_update(nn::Mlp& actor, nn::Adam& optimizer, const nn::Mlp& critic,
                    const Matrix& states, UpdateTrace* trace = nullptr);

struct EpisodeRecord {
  std::int64_t episode = 0;
  std::int64_t env_steps = 0;  // cumulative at episode end
  double episode_return = 0.0;
  double epsilon = 0.0;
  double critic_loss_mean = 0.0;
  double actor_grad_norm_mean = 0.0;
  // Wall-clock; excluded from the deterministic CSV.
  double steps_per_sec = 0.0;  // 1 / median step duration
  double wall_seconds = 0.0;
};

struct TrainingLog {
  std::vector<EpisodeRecord> episodes;
  std::int64_t env_steps = 0;
  std::int64_t updates = 0;

  // Columns: episode, env_steps, return, epsilon, critic_loss_mean,
  // actor_grad_norm_mean, plus steps_per_sec when `with_timing`.
  CsvTable to_csv(bool with_timing) const;
};

class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, TrainingLog log)
      : NumericError(what), log_(std::move(log)) {}
  const TrainingLog& log() const { return log_; }

 private:
  TrainingLog log_;
};

struct UpdateEvent {
  std::int64_t env_step;
  const Batch& batch;
  const UpdateTrace& trace;
  const nn::Mlp& actor_before;  // actor parameters the gradient was taken at
};

struct TrainHooks {
  std::int64_t eval_every = 0;
  std::function<void(const Agent&, std::int64_t env_steps)> on_eval;
  std::function<void(const UpdateEvent&)> on_update;
  // Duration of each environment step including its update, in seconds.
  std::function<void(std::int64_t env_steps, double seconds)> on_step;
};

// Explore-act, store, sample, critic target and update, actor update, soft
// target updates; one update per environment step once the buffer holds
// max(minibatch, warmup) transitions. Single-threaded and deterministic per
// config.seed.
TrainingLog train(Environment& env, Agent& agent, const WolpertingerPolicy& policy,
                  const TrainerConfig& config, const TrainHooks& hooks = {});

// Greedy (no exploration) returns of `episodes` episodes, each on its own
// clone of `env` seeded from (seed, episode). Episodes run in parallel;
// the result order is fixed.
std::vector<double> evaluate_policy(const Environment& env, const nn::Mlp& actor,
                                    const nn::Mlp& critic, const WolpertingerPolicy& policy,
                                    int episodes, int max_steps, std::uint64_t seed);

}  // namespace wolp

#endif  // WOLP_DDPG_HPP_
