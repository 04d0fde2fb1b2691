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

#ifndef WOLP_RECOMMENDER_HPP_
#define WOLP_RECOMMENDER_HPP_

#include <filesystem>
#include <utility>
#include <vector>

#include "wolp/env.hpp"

namespace wolp {

// Item catalogue with a sparse acceptance matrix: W(i, j) is the probability
// that a user consuming item i accepts a recommendation of item j.
struct RecommenderData {
  int num_items = 0;
  int dim = 0;
  std::vector<double> embeddings;  // num_items x dim, row-major
  // Row i: (j, W(i, j)) for the non-zero entries, ascending j.
  std::vector<std::vector<std::pair<ActionId, double>>> acceptance;
  std::vector<double> rewards;

  void validate() const;
  double w(ActionId i, ActionId j) const;

  // "WREC", u32 version, u32 items, u32 dim, u64 nnz, f64 embeddings,
  // (u32 i, u32 j, f64 w) triplets, f64 rewards. Little-endian.
  void save(const std::filesystem::path& path) const;
  static RecommenderData load(const std::filesystem::path& path);
};

struct RecommenderOptions {
  double accept_end_probability = 0.1;
  double reject_end_probability = 0.2;
  int guided_subset_size = 10;
};

// A user walks through items. Each step the agent recommends an item: with
// probability W(cur, rec) it is accepted (reward r[rec], episode ends w.p.
// 0.1); otherwise the user picks a uniformly random item (reward 0, episode
// ends w.p. 0.2). The observation is the current item's embedding.
class RecommenderSim final : public Environment {
 public:
  explicit RecommenderSim(RecommenderData data, RecommenderOptions options = {});

  std::string name() const override { return "recommender"; }
  int observation_dim() const override { return data_->dim; }
  std::shared_ptr<const ActionSet> action_set() const override { return actions_; }
  void seed(std::uint64_t seed) override { rng_.seed(seed); }
  Vector reset() override;
  EnvStep step(ActionId recommended) override;
  std::span<const ActionId> guided_actions() const override;
  std::unique_ptr<Environment> clone() const override;

  const RecommenderData& data() const { return *data_; }
  ActionId current_item() const { return current_; }
  void set_current_item(ActionId item);
  // Whether the most recent step was an accepted recommendation.
  bool last_accepted() const { return last_accepted_; }

 private:
  std::shared_ptr<const RecommenderData> data_;
  RecommenderOptions options_;
  std::shared_ptr<const ActionSet> actions_;
  // Top items by W(i, .) per item.
  std::shared_ptr<const std::vector<std::vector<ActionId>>> guided_;
  Rng rng_{0};
  ActionId current_ = 0;
  bool done_ = true;
  bool last_accepted_ = false;
};

// Synthetic catalogue: items are noisy copies of sqrt(n)/2 random cluster
// directions in a random rank-4 subspace, with unit norm; each row of W is a
// softmax over the `neighbors_per_item` most similar items plus an implicit
// "reject" option; rewards are uniform in [0, 1]. Deterministic per seed.
RecommenderData synth_recommender(int num_items, int embed_dim, int neighbors_per_item,
                                  std::uint64_t seed);

}  // namespace wolp

#endif  // WOLP_RECOMMENDER_HPP_
