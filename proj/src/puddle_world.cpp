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

#include "wolp/puddle_world.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wolp {

CellReward puddle_reward(Cell cell) {
  switch (cell) {
    case Cell::kEmpty:
    case Cell::kStart:
      return {-1.0, false};
    case Cell::kPuddle:
      return {-3.0, false};
    case Cell::kGoal:
      return {250.0, true};
  }
  throw std::invalid_argument("puddle_reward: invalid cell");
}

PuddleMap::PuddleMap(int rows, int cols, std::vector<Cell> cells)
    : rows_(rows), cols_(cols), cells_(std::move(cells)), start_{-1, -1} {
  if (rows_ < 1 || cols_ < 1 || rows_ * cols_ < 2) {
    throw std::invalid_argument("PuddleMap: grid must hold at least two cells");
  }
  require_dim(cells_.size(), static_cast<std::size_t>(rows_) * cols_, "PuddleMap cells");
  int starts = 0, goals = 0;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      if (at(r, c) == Cell::kStart) {
        ++starts;
        start_ = {r, c};
      }
      if (at(r, c) == Cell::kGoal) ++goals;
    }
  }
  if (starts != 1) throw std::invalid_argument("PuddleMap: need exactly one start cell");
  if (goals != 1 || at(rows_ - 1, cols_ - 1) != Cell::kGoal) {
    throw std::invalid_argument("PuddleMap: the single goal must be the bottom-right cell");
  }
}

PuddleMap PuddleMap::parse(const std::string& ascii) {
  std::istringstream in(ascii);
  std::string line;
  std::vector<Cell> cells;
  int rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (cols < 0) cols = static_cast<int>(line.size());
    if (static_cast<int>(line.size()) != cols) {
      throw std::invalid_argument("PuddleMap: ragged row " + std::to_string(rows + 1));
    }
    for (char ch : line) {
      switch (ch) {
        case '.': cells.push_back(Cell::kEmpty); break;
        case 'P': cells.push_back(Cell::kPuddle); break;
        case 'S': cells.push_back(Cell::kStart); break;
        case 'G': cells.push_back(Cell::kGoal); break;
        default:
          throw std::invalid_argument(std::string("PuddleMap: unknown cell '") + ch + "'");
      }
    }
    ++rows;
  }
  return PuddleMap(rows, std::max(cols, 0), std::move(cells));
}

PuddleMap PuddleMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("PuddleMap: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PuddleMap::to_ascii() const {
  static constexpr char kGlyph[] = {'.', 'P', 'S', 'G'};
  std::string out;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out.push_back(kGlyph[static_cast<int>(at(r, c))]);
    out.push_back('\n');
  }
  return out;
}

void PuddleMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("PuddleMap: cannot write " + path.string());
  out << to_ascii();
}

PuddleMap PuddleMap::generate(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw std::invalid_argument("PuddleMap::generate: grid too small");
  }
  std::vector<Cell> cells(static_cast<std::size_t>(rows) * cols, Cell::kEmpty);
  Rng rng(seed);
  const int count = std::max(1, rows * cols / 12);
  const int max_h = std::max(1, rows / 4), max_w = std::max(1, cols / 4);
  for (int i = 0; i < count; ++i) {
    const int h = std::uniform_int_distribution<int>(1, max_h)(rng);
    const int w = std::uniform_int_distribution<int>(1, max_w)(rng);
    const int r0 = std::uniform_int_distribution<int>(0, rows - h)(rng);
    const int c0 = std::uniform_int_distribution<int>(0, cols - w)(rng);
    for (int r = r0; r < r0 + h; ++r)
      for (int c = c0; c < c0 + w; ++c) cells[static_cast<std::size_t>(r) * cols + c] = Cell::kPuddle;
  }
  cells.front() = Cell::kStart;
  cells.back() = Cell::kGoal;
  return PuddleMap(rows, cols, std::move(cells));
}

std::vector<Move> plan_from_id(ActionId id, int plan_length) {
  if (plan_length < 1 || plan_length > 30) {
    throw DimensionError("plan_from_id: plan length must be in [1, 30]");
  }
  if (id < 0 || static_cast<std::int64_t>(id) >= (std::int64_t{1} << plan_length)) {
    throw DimensionError("plan_from_id: id out of range");
  }
  std::vector<Move> plan(static_cast<std::size_t>(plan_length));
  for (int j = 0; j < plan_length; ++j) {
    plan[j] = ((id >> (plan_length - 1 - j)) & 1) ? Move::kRight : Move::kDown;
  }
  return plan;
}

ActionId plan_to_id(std::span<const Move> plan) {
  ActionId id = 0;
  for (Move m : plan) id = (id << 1) | (m == Move::kRight ? 1 : 0);
  return id;
}

Vector encode_plan(std::span<const Move> plan, int plan_length) {
  require_dim(plan.size(), static_cast<std::size_t>(plan_length), "encode_plan");
  Vector v = Vector::Zero(2 * plan_length);
  for (int j = 0; j < plan_length; ++j) v(2 * j + (plan[j] == Move::kRight ? 1 : 0)) = 1.0;
  return v;
}

std::vector<Move> decode_plan(const Vector& embedding) {
  if (embedding.size() % 2 != 0 || embedding.size() == 0) {
    throw DimensionError("decode_plan: embedding length must be a positive even number");
  }
  std::vector<Move> plan;
  for (Eigen::Index j = 0; j < embedding.size() / 2; ++j) {
    plan.push_back(embedding(2 * j + 1) > embedding(2 * j) ? Move::kRight : Move::kDown);
  }
  return plan;
}

ActionSet plan_action_set(int plan_length) {
  if (plan_length < 1 || plan_length > 24) {
    throw DimensionError("plan_action_set: plan length must be in [1, 24]");
  }
  const std::int64_t count = std::int64_t{1} << plan_length;
  const int dim = 2 * plan_length;
  std::vector<double> values(static_cast<std::size_t>(count * dim), 0.0);
  for (std::int64_t id = 0; id < count; ++id) {
    double* row = values.data() + id * dim;
    for (int j = 0; j < plan_length; ++j) {
      const bool right = (id >> (plan_length - 1 - j)) & 1;
      row[2 * j + (right ? 1 : 0)] = 1.0;
    }
  }
  return ActionSet(dim, std::move(values));
}

PuddleWorld::PuddleWorld(PuddleMap map, int plan_length, int window_radius)
    : map_(std::move(map)),
      plan_length_(plan_length),
      radius_(window_radius),
      window_(2 * window_radius + 1),
      actions_(std::make_shared<const ActionSet>(plan_action_set(plan_length))),
      pos_(map_.start()) {
  if (window_radius < 0) throw std::invalid_argument("PuddleWorld: negative window radius");
}

Vector PuddleWorld::observe() const {
  Vector obs = Vector::Zero(observation_dim());
  int cell = 0;
  for (int dr = -radius_; dr <= radius_; ++dr) {
    for (int dc = -radius_; dc <= radius_; ++dc, ++cell) {
      const int r = pos_.first + dr, c = pos_.second + dc;
      if (r < 0 || c < 0 || r >= map_.rows() || c >= map_.cols()) continue;
      obs(4 * cell + static_cast<int>(map_.at(r, c))) = 1.0;
    }
  }
  return obs;
}

Vector PuddleWorld::reset() {
  pos_ = map_.start();
  done_ = false;
  return observe();
}

EnvStep PuddleWorld::step(ActionId action) {
  if (done_) throw std::logic_error("PuddleWorld::step: episode has ended");
  if (!actions_->contains(action)) throw DimensionError("PuddleWorld::step: invalid action");
  EnvStep out;
  for (Move m : plan_from_id(action, plan_length_)) {
    auto next = pos_;
    if (m == Move::kDown) ++next.first; else ++next.second;
    // Moves off the grid leave the agent in place and charge that cell.
    if (next.first < map_.rows() && next.second < map_.cols()) pos_ = next;
    const CellReward cr = puddle_reward(map_.at(pos_.first, pos_.second));
    out.reward += cr.reward;
    if (cr.terminal) {
      out.terminal = true;
      done_ = true;
      break;
    }
  }
  out.observation = observe();
  return out;
}

std::unique_ptr<Environment> PuddleWorld::clone() const {
  return std::make_unique<PuddleWorld>(*this);
}

double puddle_optimal_return(const PuddleMap& map) {
  const int rows = map.rows(), cols = map.cols();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(rows) * cols, kNone);
  auto idx = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  best[idx(rows - 1, cols - 1)] = 0.0;
  for (int r = rows - 1; r >= 0; --r) {
    for (int c = cols - 1; c >= 0; --c) {
      if (r == rows - 1 && c == cols - 1) continue;
      double v = kNone;
      if (r + 1 < rows) v = std::max(v, puddle_reward(map.at(r + 1, c)).reward + best[idx(r + 1, c)]);
      if (c + 1 < cols) v = std::max(v, puddle_reward(map.at(r, c + 1)).reward + best[idx(r, c + 1)]);
      best[idx(r, c)] = v;
    }
  }
  const auto [sr, sc] = map.start();
  return best[idx(sr, sc)];
}

}  // namespace wolp
