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

#include "wolp/ddpg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>

namespace wolp {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (!t.state.allFinite() || !t.next_state.allFinite() || !std::isfinite(t.reward) ||
      !t.action_embedding.allFinite()) {
    throw NumericError("ReplayBuffer: non-finite transition");
  }
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (n == 0 || data_.size() < n) {
    throw std::logic_error("ReplayBuffer: sampling " + std::to_string(n) + " from " +
                           std::to_string(data_.size()) + " stored transitions");
  }
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

Batch Batch::gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& indices) {
  std::vector<Transition> ts;
  ts.reserve(indices.size());
  for (std::size_t i : indices) ts.push_back(buffer.at(i));
  return from(ts);
}

Batch Batch::from(const std::vector<Transition>& ts) {
  if (ts.empty()) throw DimensionError("Batch: empty");
  const auto n = static_cast<Eigen::Index>(ts.size());
  Batch b;
  b.states.resize(ts[0].state.size(), n);
  b.actions.resize(ts[0].action_embedding.size(), n);
  b.next_states.resize(ts[0].next_state.size(), n);
  b.rewards.resize(n);
  b.terminal.resize(ts.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = ts[static_cast<std::size_t>(i)];
    require_dim(t.state.size(), b.states.rows(), "Batch state");
    require_dim(t.next_state.size(), b.next_states.rows(), "Batch next_state");
    require_dim(t.action_embedding.size(), b.actions.rows(), "Batch action");
    b.states.col(i) = t.state;
    b.actions.col(i) = t.action_embedding;
    b.next_states.col(i) = t.next_state;
    b.rewards(i) = t.reward;
    b.terminal[static_cast<std::size_t>(i)] = t.terminal;
  }
  return b;
}

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("TrainerConfig: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("TrainerConfig: tau must lie in (0, 1]");
  if (minibatch_size < 1) throw std::invalid_argument("TrainerConfig: minibatch_size must be >= 1");
  if (buffer_capacity < static_cast<std::size_t>(minibatch_size)) {
    throw std::invalid_argument("TrainerConfig: buffer_capacity below minibatch_size");
  }
  if (steps_per_episode < 0) throw std::invalid_argument("TrainerConfig: steps_per_episode must be >= 0");
  if (episodes < 0 || max_env_steps < 0) throw std::invalid_argument("TrainerConfig: negative budget");
  if (episodes == 0 && max_env_steps == 0 && steps_per_episode > 0) {
    throw std::invalid_argument("TrainerConfig: set episodes or max_env_steps");
  }
  if (actor_learning_rate <= 0 || critic_learning_rate <= 0) {
    throw std::invalid_argument("TrainerConfig: learning rates must be positive");
  }
  for (int h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("TrainerConfig: hidden sizes must be positive");
  if (noise_fraction < 0) throw std::invalid_argument("TrainerConfig: noise_fraction must be >= 0");
}

std::int64_t TrainerConfig::step_budget() const {
  const std::int64_t by_episodes = episodes > 0 ? episodes * steps_per_episode : 0;
  if (max_env_steps > 0 && by_episodes > 0) return std::min(max_env_steps, by_episodes);
  return std::max(max_env_steps, by_episodes);
}

Agent Agent::create(int observation_dim, const ActionSet& actions, const TrainerConfig& config,
                    Rng& rng) {
  const int n = actions.dim();
  std::vector<int> actor_sizes{observation_dim};
  actor_sizes.insert(actor_sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  actor_sizes.push_back(n);
  std::vector<int> critic_sizes{observation_dim + n};
  critic_sizes.insert(critic_sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  critic_sizes.push_back(1);

  Agent a;
  a.actor = nn::Mlp::random(actor_sizes, nn::Activation::kRelu, nn::Activation::kTanh, rng);
  Vector lo = actions.lower_bound(), hi = actions.upper_bound();
  for (int d = 0; d < n; ++d) {
    if (hi(d) - lo(d) < 1e-9) {
      lo(d) -= 0.5;
      hi(d) += 0.5;
    }
  }
  a.actor.set_output_bounds(lo, hi);
  a.critic = nn::Mlp::random(critic_sizes, nn::Activation::kRelu, nn::Activation::kIdentity, rng);
  a.target_actor = a.actor;
  a.target_critic = a.critic;
  a.actor_optimizer = nn::Adam(a.actor, {.learning_rate = config.actor_learning_rate});
  a.critic_optimizer = nn::Adam(a.critic, {.learning_rate = config.critic_learning_rate});
  return a;
}

Matrix critic_input(const Matrix& states, const Matrix& actions) {
  if (states.cols() != actions.cols()) throw DimensionError("critic_input: batch size mismatch");
  Matrix x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Vector critic_targets(const Batch& batch, const nn::Mlp& target_actor,
                      const nn::Mlp& target_critic, const WolpertingerPolicy& policy, double gamma,
                      int k_override) {
  if (batch.size() == 0) throw DimensionError("critic_targets: empty batch");
  Vector y = batch.rewards;
  if (gamma == 0.0) return y;
  const auto next = policy.select_batch(target_actor, target_critic, batch.next_states, k_override);
  for (int i = 0; i < batch.size(); ++i) {
    if (!batch.terminal[static_cast<std::size_t>(i)]) y(i) += gamma * next.q_values[static_cast<std::size_t>(i)];
  }
  return y;
}

double critic_update(nn::Mlp& critic, nn::Adam& optimizer, const Batch& batch,
                     const Vector& targets, UpdateTrace* trace) {
  require_dim(targets.size(), batch.size(), "critic_update targets");
  const Matrix x = critic_input(batch.states, batch.actions);
  const Matrix q = critic.forward_batch(x);
  const Eigen::RowVectorXd residual = targets.transpose() - q.row(0);
  const double n = batch.size();
  const double loss = residual.squaredNorm() / n;
  if (!std::isfinite(loss)) throw NumericError("critic_update: non-finite loss");
  const Matrix grad_out = (-2.0 / n) * residual;
  const nn::GradientBundle g = critic.backward_batch(x, grad_out);
  optimizer.step(critic, g);
  if (trace != nullptr) trace->critic_actions = batch.actions;
  return loss;
}

nn::GradientBundle actor_policy_gradient(const nn::Mlp& actor, const nn::Mlp& critic,
                                         const Matrix& states, Matrix* action_points) {
  const Matrix protos = actor.forward_batch(states);
  const Matrix x = critic_input(states, protos);
  const double n = static_cast<double>(states.cols());
  const Matrix dq_out = Matrix::Constant(1, states.cols(), 1.0 / n);
  const nn::GradientBundle cg = critic.backward_batch(x, dq_out);
  const Matrix dq_da = cg.input.bottomRows(protos.rows());
  nn::GradientBundle g = actor.backward_batch(states, dq_da);
  if (action_points != nullptr) *action_points = protos;
  return g;
}

double actor_update(nn::Mlp& actor, nn::Adam& optimizer, const nn::Mlp& critic,
                    const Matrix& states, UpdateTrace* trace) {
  Matrix points;
  nn::GradientBundle g = actor_policy_gradient(actor, critic, states, &points);
  if (!g.all_finite()) throw NumericError("actor_update: non-finite policy gradient");
  const double norm = std::sqrt(g.squared_norm());
  for (auto& w : g.weights) w = -w;
  for (auto& b : g.biases) b = -b;
  optimizer.step(actor, g);
  if (trace != nullptr) trace->actor_gradient_points = std::move(points);
  return norm;
}

CsvTable TrainingLog::to_csv(bool with_timing) const {
  CsvTable t;
  t.header = {"episode", "env_steps", "return", "epsilon", "critic_loss_mean", "actor_grad_norm_mean"};
  if (with_timing) t.header.push_back("steps_per_sec");
  for (const auto& e : episodes) {
    std::vector<std::string> row{std::to_string(e.episode), std::to_string(e.env_steps),
                                 format_double(e.episode_return), format_double(e.epsilon),
                                 format_double(e.critic_loss_mean),
                                 format_double(e.actor_grad_norm_mean)};
    if (with_timing) row.push_back(format_double(e.steps_per_sec));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

TrainingLog train(Environment& env, Agent& agent, const WolpertingerPolicy& policy,
                  const TrainerConfig& config, const TrainHooks& hooks) {
  config.validate();
  require_dim(static_cast<std::size_t>(env.observation_dim()),
              static_cast<std::size_t>(agent.actor.input_size()), "train: observation vs actor");
  require_dim(static_cast<std::size_t>(policy.actions().dim()),
              static_cast<std::size_t>(agent.actor.output_size()), "train: action dim vs actor");

  TrainingLog log;
  const std::int64_t budget = config.step_budget();
  if (budget == 0 || config.steps_per_episode == 0) return log;

  using Clock = std::chrono::steady_clock;
  Rng rng(derive_seed(config.seed, 0));
  env.seed(derive_seed(config.seed, 1));
  ReplayBuffer buffer(config.buffer_capacity);
  const ActionSet& actions = policy.actions();
  ExplorationParams explore;
  explore.noise_sigma = config.noise_fraction * (actions.upper_bound() - actions.lower_bound());
  explore.use_guided_support = config.guided_exploration;
  const auto min_fill = static_cast<std::size_t>(
      std::max<std::int64_t>(config.minibatch_size, config.warmup_steps));

  std::int64_t step = 0;
  try {
    for (std::int64_t episode = 0;
         step < budget && (config.episodes == 0 || episode < config.episodes); ++episode) {
      const auto episode_start = Clock::now();
      Vector state = env.reset();
      EpisodeRecord rec;
      rec.episode = episode;
      double loss_sum = 0.0, grad_sum = 0.0;
      int updates = 0;
      std::vector<double> step_seconds;
      for (int t = 0; t < config.steps_per_episode && step < budget; ++t) {
        const auto step_start = Clock::now();
        explore.epsilon = config.epsilon.at(step, budget);
        rec.epsilon = explore.epsilon;
        const PolicyDecision d = policy.select_explore(agent.actor, agent.critic, state, explore,
                                                       env.guided_actions(), rng);
        const EnvStep out = env.step(d.chosen);
        rec.episode_return += out.reward;
        buffer.push({state, d.chosen, actions.embedding(d.chosen), out.reward * config.reward_scale,
                     out.observation, out.terminal});
        ++step;

        if (buffer.size() >= min_fill) {
          const Batch batch = Batch::gather(
              buffer, buffer.sample_indices(static_cast<std::size_t>(config.minibatch_size), rng));
          const Vector y = critic_targets(batch, agent.target_actor, agent.target_critic, policy,
                                          config.gamma, config.target_k);
          UpdateTrace trace;
          UpdateTrace* tp = hooks.on_update ? &trace : nullptr;
          loss_sum += critic_update(agent.critic, agent.critic_optimizer, batch, y, tp);
          std::optional<nn::Mlp> actor_before;
          if (hooks.on_update) actor_before = agent.actor;
          grad_sum += actor_update(agent.actor, agent.actor_optimizer, agent.critic, batch.states, tp);
          nn::soft_update(agent.target_critic, agent.critic, config.tau);
          nn::soft_update(agent.target_actor, agent.actor, config.tau);
          ++updates;
          ++log.updates;
          if (hooks.on_update) hooks.on_update({step, batch, trace, *actor_before});
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - step_start).count();
        step_seconds.push_back(seconds);
        if (hooks.on_step) hooks.on_step(step, seconds);

        if (hooks.on_eval && hooks.eval_every > 0 && step % hooks.eval_every == 0) {
          hooks.on_eval(agent, step);
        }
        state = out.observation;
        if (out.terminal || out.truncated) break;
      }
      rec.env_steps = step;
      rec.critic_loss_mean = updates ? loss_sum / updates : 0.0;
      rec.actor_grad_norm_mean = updates ? grad_sum / updates : 0.0;
      const double med = median(step_seconds);
      rec.steps_per_sec = med > 0 ? 1.0 / med : 0.0;
      rec.wall_seconds = std::chrono::duration<double>(Clock::now() - episode_start).count();
      log.episodes.push_back(rec);
      log.env_steps = step;
    }
  } catch (const NumericError& e) {
    log.env_steps = step;
    throw TrainingAborted(std::string("training aborted at step ") + std::to_string(step) + ": " +
                              e.what(),
                          std::move(log));
  }
  return log;
}

std::vector<double> evaluate_policy(const Environment& env, const nn::Mlp& actor,
                                    const nn::Mlp& critic, const WolpertingerPolicy& policy,
                                    int episodes, int max_steps, std::uint64_t seed) {
  std::vector<double> returns(static_cast<std::size_t>(std::max(episodes, 0)), 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (int ep = 0; ep < episodes; ++ep) {
    try {
      auto local = env.clone();
      local->seed(derive_seed(seed, static_cast<std::uint64_t>(ep)));
      Vector state = local->reset();
      double total = 0.0;
      for (int t = 0; t < max_steps; ++t) {
        const PolicyDecision d = policy.select(actor, critic, state);
        const EnvStep out = local->step(d.chosen);
        total += out.reward;
        state = out.observation;
        if (out.terminal || out.truncated) break;
      }
      returns[static_cast<std::size_t>(ep)] = total;
    } catch (...) {
#pragma omp critical(wolp_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return returns;
}

}  // namespace wolp
