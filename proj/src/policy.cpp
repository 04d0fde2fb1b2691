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

#include "wolp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "wolp/csv.hpp"
#include "wolp/kernels.hpp"

namespace wolp {

KSpec KSpec::absolute(int k) {
  if (k < 1) throw std::invalid_argument("KSpec: k must be >= 1");
  KSpec s;
  s.fractional_ = false;
  s.value_ = k;
  return s;
}

KSpec KSpec::fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("KSpec: fraction must lie in (0, 1]");
  KSpec s;
  s.fractional_ = true;
  s.value_ = f;
  return s;
}

KSpec KSpec::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("KSpec: empty");
  if (text.back() == '%') {
    return fraction(std::stod(text.substr(0, text.size() - 1)) / 100.0);
  }
  std::size_t pos = 0;
  const long long v = std::stoll(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("KSpec: cannot parse '" + text + "'");
  return absolute(static_cast<int>(v));
}

int KSpec::resolve(ActionId num_actions) const {
  if (num_actions < 1) throw std::invalid_argument("KSpec: empty action set");
  if (fractional_) {
    const auto k = static_cast<long long>(std::llround(value_ * static_cast<double>(num_actions)));
    return static_cast<int>(std::clamp<long long>(k, 1, num_actions));
  }
  const int k = static_cast<int>(value_);
  if (k > num_actions) {
    throw std::invalid_argument("KSpec: k = " + std::to_string(k) + " exceeds |A| = " +
                                std::to_string(num_actions));
  }
  return k;
}

std::string KSpec::to_string() const {
  if (fractional_) return format_double(value_ * 100.0) + "%";
  return std::to_string(static_cast<int>(value_));
}

double EpsilonSchedule::at(std::int64_t step, std::int64_t total_steps) const {
  const double horizon = fraction * static_cast<double>(total_steps);
  if (horizon <= 0.0 || static_cast<double>(step) >= horizon) return end;
  return start + (end - start) * static_cast<double>(step) / horizon;
}

WolpertingerPolicy::WolpertingerPolicy(std::shared_ptr<const ActionIndex> index,
                                       PolicyConfig config)
    : index_(std::move(index)), config_(config) {
  if (!index_) throw std::invalid_argument("WolpertingerPolicy: null index");
  k_ = config_.k.resolve(index_->actions().size());
}

std::size_t argmax_by_id(std::span<const double> q, std::span<const Neighbor> candidates) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best] || (q[i] == q[best] && candidates[i].id < candidates[best].id)) best = i;
  }
  return best;
}

Vector proto_action(const nn::Mlp& actor, const Vector& state) {
  return actor.forward(state);
}

PolicyDecision WolpertingerPolicy::select_from_proto(const nn::Mlp& critic, const Vector& state,
                                                     const Vector& proto) const {
  PolicyDecision d;
  d.proto_action = proto;
  d.candidates = index_->query(proto, k_);
  if (!config_.refinement || k_ == 1) {
    d.chosen = d.candidates.front().id;
    d.chosen_q = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  std::vector<ActionId> ids(d.candidates.size());
  std::transform(d.candidates.begin(), d.candidates.end(), ids.begin(),
                 [](const Neighbor& n) { return n.id; });
  d.q_values = ids.size() >= 2 * static_cast<std::size_t>(kernels::kScoreBlock)
                   ? kernels::score_actions_parallel(critic, state, actions(), ids)
                   : kernels::score_actions_serial(critic, state, actions(), ids);
  const std::size_t best = argmax_by_id(d.q_values, d.candidates);
  d.chosen = d.candidates[best].id;
  d.chosen_q = d.q_values[best];
  return d;
}

PolicyDecision WolpertingerPolicy::select(const nn::Mlp& actor, const nn::Mlp& critic,
                                          const Vector& state) const {
  return select_from_proto(critic, state, proto_action(actor, state));
}

PolicyDecision WolpertingerPolicy::select_explore(const nn::Mlp& actor, const nn::Mlp& critic,
                                                  const Vector& state,
                                                  const ExplorationParams& explore,
                                                  std::span<const ActionId> guided_support,
                                                  Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector proto = proto_action(actor, state);
  if (explore.epsilon > 0.0 && unit(rng) < explore.epsilon) {
    PolicyDecision d;
    d.proto_action = std::move(proto);
    d.explored = true;
    if (explore.use_guided_support && !guided_support.empty()) {
      d.chosen = guided_support[std::uniform_int_distribution<std::size_t>(0, guided_support.size() - 1)(rng)];
    } else {
      d.chosen = std::uniform_int_distribution<ActionId>(0, actions().size() - 1)(rng);
    }
    d.candidates = {{d.chosen, squared_l2(actions()[d.chosen].data(), d.proto_action.data(), actions().dim())}};
    d.chosen_q = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  if (explore.noise_sigma.size() > 0) {
    require_dim(explore.noise_sigma.size(), proto.size(), "ExplorationParams::noise_sigma");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < proto.size(); ++i) proto(i) += explore.noise_sigma(i) * normal(rng);
  }
  return select_from_proto(critic, state, proto);
}

WolpertingerPolicy::BatchChoice WolpertingerPolicy::select_batch(const nn::Mlp& actor,
                                                                 const nn::Mlp& critic,
                                                                 const Matrix& states,
                                                                 int k_override) const {
  const int k = k_override > 0 ? std::min<int>(k_override, actions().size()) : k_;
  const Matrix protos = actor.forward_batch(states);
  const auto batch = static_cast<std::size_t>(states.cols());
  std::vector<NeighborResult> cands(batch);
  std::size_t total = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    const Vector p = protos.col(static_cast<Eigen::Index>(i));
    cands[i] = index_->query(p, k);
    if (!config_.refinement) cands[i].resize(1);
    total += cands[i].size();
  }
  const int m = static_cast<int>(states.rows());
  const int n = actions().dim();
  Matrix inputs(m + n, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    for (const Neighbor& c : cands[i]) {
      inputs.col(col).head(m) = states.col(static_cast<Eigen::Index>(i));
      auto emb = actions()[c.id];
      for (int d = 0; d < n; ++d) inputs(m + d, col) = emb[d];
      ++col;
    }
  }
  const Matrix q = critic.forward_batch(inputs);
  BatchChoice out;
  out.actions.resize(batch);
  out.q_values.resize(batch);
  col = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    const auto len = static_cast<Eigen::Index>(cands[i].size());
    std::span<const double> qs(q.data() + col, static_cast<std::size_t>(len));
    const std::size_t best = argmax_by_id(qs, cands[i]);
    out.actions[i] = cands[i][best].id;
    out.q_values[i] = qs[best];
    col += len;
  }
  return out;
}

PolicyDecision full_argmax_action(const nn::Mlp& critic, const Vector& state,
                                  const ActionSet& actions, bool parallel) {
  std::vector<ActionId> ids(static_cast<std::size_t>(actions.size()));
  std::iota(ids.begin(), ids.end(), 0);
  PolicyDecision d;
  d.q_values = parallel ? kernels::score_actions_parallel(critic, state, actions, ids)
                        : kernels::score_actions_serial(critic, state, actions, ids);
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.q_values.size(); ++i) {
    if (d.q_values[i] > d.q_values[best]) best = i;  // ids ascend, so ties keep the smaller
  }
  d.chosen = static_cast<ActionId>(best);
  d.chosen_q = d.q_values[best];
  return d;
}

DecisionLog::DecisionLog(std::ostream& out) : out_(out) {
  out_ << "step,proto_action,candidates,chosen,chosen_q\n";
}

void DecisionLog::record(std::int64_t step, const PolicyDecision& d) {
  out_ << step << ',';
  for (Eigen::Index i = 0; i < d.proto_action.size(); ++i) {
    if (i) out_ << ';';
    out_ << format_double(d.proto_action(i));
  }
  out_ << ',' << d.candidates.size() << ',' << d.chosen << ',' << format_double(d.chosen_q) << '\n';
}

}  // namespace wolp
