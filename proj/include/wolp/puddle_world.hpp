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

#ifndef WOLP_PUDDLE_WORLD_HPP_
#define WOLP_PUDDLE_WORLD_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "wolp/env.hpp"

namespace wolp {

enum class Cell : std::uint8_t { kEmpty = 0, kPuddle = 1, kStart = 2, kGoal = 3 };
enum class Move : std::uint8_t { kDown = 0, kRight = 1 };

struct CellReward {
  double reward;
  bool terminal;
};
// Empty -1, puddle -3, goal +250 and terminal. Start costs like empty.
CellReward puddle_reward(Cell cell);

// Grid map. Exactly one start; the goal is the bottom-right cell.
class PuddleMap {
 public:
  PuddleMap(int rows, int cols, std::vector<Cell> cells);

  // ASCII rows of '.', 'P', 'S', 'G'.
  static PuddleMap parse(const std::string& ascii);
  static PuddleMap load(const std::filesystem::path& path);
  std::string to_ascii() const;
  void save(const std::filesystem::path& path) const;

  // Start at the top-left, goal at the bottom-right, axis-aligned
  // rectangular puddles placed from `seed`, never on start or goal.
  static PuddleMap generate(int rows, int cols, std::uint64_t seed);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Cell at(int r, int c) const { return cells_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::pair<int, int> start() const { return start_; }

 private:
  int rows_;
  int cols_;
  std::vector<Cell> cells_;
  std::pair<int, int> start_;
};

// A plan of n base moves is ActionId = binary number of the move sequence,
// first move in the most significant bit, right = 1. Its embedding is the
// concatenation of one-hot pairs: down -> (1, 0), right -> (0, 1).
std::vector<Move> plan_from_id(ActionId id, int plan_length);
ActionId plan_to_id(std::span<const Move> plan);
Vector encode_plan(std::span<const Move> plan, int plan_length);
std::vector<Move> decode_plan(const Vector& embedding);
ActionSet plan_action_set(int plan_length);

class PuddleWorld final : public Environment {
 public:
  PuddleWorld(PuddleMap map, int plan_length, int window_radius = 2);

  std::string name() const override { return "puddle"; }
  int observation_dim() const override { return 4 * window_ * window_; }
  std::shared_ptr<const ActionSet> action_set() const override { return actions_; }
  void seed(std::uint64_t) override {}
  Vector reset() override;
  EnvStep step(ActionId action) override;
  std::unique_ptr<Environment> clone() const override;

  const PuddleMap& map() const { return map_; }
  int plan_length() const { return plan_length_; }
  std::pair<int, int> position() const { return pos_; }

  // Window of (2w+1)^2 cells around the agent, row-major, one-hot over the
  // four cell types; cells outside the grid are all-zero.
  Vector observe() const;

 private:
  PuddleMap map_;
  int plan_length_;
  int radius_;
  int window_;
  std::shared_ptr<const ActionSet> actions_;
  std::pair<int, int> pos_;
  bool done_ = false;
};

// Best undiscounted return from the start over monotone (down/right) paths.
// Any such path can be cut into plans, so this bounds every plan length.
double puddle_optimal_return(const PuddleMap& map);

}  // namespace wolp

#endif  // WOLP_PUDDLE_WORLD_HPP_
