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

#ifndef WOLP_SRC_INDEX_IMPL_HPP_
#define WOLP_SRC_INDEX_IMPL_HPP_

#include <algorithm>
#include <queue>
#include <unordered_set>
#include <vector>

#include "wolp/action_index.hpp"

namespace wolp::detail {

// Result accumulator for approximate search: keeps the k best (distance, id)
// pairs, rejects ids it has already seen.
class ResultSet {
 public:
  ResultSet(int k, bool dedupe) : k_(static_cast<std::size_t>(k)), dedupe_(dedupe) {}

  bool full() const { return heap_.size() >= k_; }
  double worst() const {
    return full() ? heap_.front().distance : std::numeric_limits<double>::infinity();
  }

  // Returns false if the id was already examined.
  bool add(ActionId id, double dist) {
    if (dedupe_ && !seen_.insert(id).second) return false;
    const Neighbor n{id, dist};
    if (heap_.size() < k_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (n < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = n;
      std::push_heap(heap_.begin(), heap_.end());
    }
    return true;
  }

  NeighborResult take() && {
    std::sort_heap(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  bool dedupe_;
  std::vector<Neighbor> heap_;
  std::unordered_set<ActionId> seen_;
};

struct Branch {
  int tree;
  int node;
  double mindist;
  friend bool operator>(const Branch& a, const Branch& b) {
    if (a.mindist != b.mindist) return a.mindist > b.mindist;
    if (a.tree != b.tree) return a.tree > b.tree;
    return a.node > b.node;
  }
};
using BranchQueue = std::priority_queue<Branch, std::vector<Branch>, std::greater<>>;

std::unique_ptr<ActionIndex> make_exact_index(std::shared_ptr<const ActionSet> actions,
                                              const IndexConfig& config);
std::unique_ptr<ActionIndex> make_kd_forest(std::shared_ptr<const ActionSet> actions,
                                            const IndexConfig& config,
                                            std::uint64_t seed);
std::unique_ptr<ActionIndex> make_kmeans_tree(std::shared_ptr<const ActionSet> actions,
                                              const IndexConfig& config,
                                              std::uint64_t seed);

}  // namespace wolp::detail

#endif  // WOLP_SRC_INDEX_IMPL_HPP_
