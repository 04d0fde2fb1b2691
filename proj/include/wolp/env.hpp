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

#ifndef WOLP_ENV_HPP_
#define WOLP_ENV_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "wolp/action_set.hpp"
#include "wolp/types.hpp"

namespace wolp {

struct EnvStep {
  Vector observation;
  double reward = 0.0;
  bool terminal = false;
  // Episode cut by a time limit; the state itself is not absorbing.
  bool truncated = false;
};

// Episodic environment with an embedded discrete action set.
// Instances are single-threaded; use clone() for one instance per thread.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int observation_dim() const = 0;
  virtual std::shared_ptr<const ActionSet> action_set() const = 0;

  virtual void seed(std::uint64_t seed) = 0;
  virtual Vector reset() = 0;
  // Throws std::logic_error after a terminal or truncated step.
  virtual EnvStep step(ActionId action) = 0;

  // Environment-supplied exploration subset for the current state; empty
  // means "no guidance, use the full action set".
  virtual std::span<const ActionId> guided_actions() const { return {}; }

  virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace wolp

#endif  // WOLP_ENV_HPP_
