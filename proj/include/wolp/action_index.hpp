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

#ifndef WOLP_ACTION_INDEX_HPP_
#define WOLP_ACTION_INDEX_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wolp/action_set.hpp"
#include "wolp/types.hpp"

namespace wolp {

enum class IndexTier { kExact, kSlow, kMedium, kFast };

std::string to_string(IndexTier tier);
IndexTier parse_tier(const std::string& name);

// Fixed accuracy tiers in the style of FLANN presets.
//   Slow:   hierarchical k-means tree, branching 16, best-bin-first search.
//   Medium: forest of randomized k-d trees, 39 leaf checks.
//   Fast:   single randomized k-d tree, 1 leaf check.
// `checks` counts leaf points examined before the search may stop; the
// search never stops before it holds min(k, |A|) results.
struct IndexConfig {
  IndexTier tier = IndexTier::kExact;
  int branching = 16;
  int kmeans_iterations = 11;
  int trees = 1;
  int checks = 1;
  int leaf_size = 1;
  // Exact tier: use the OpenMP scan instead of the serial one.
  bool parallel_scan = false;

  static IndexConfig for_tier(IndexTier tier);
  void validate() const;
};

struct Neighbor {
  ActionId id;
  double distance;  // squared L2

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  }
  friend bool operator==(const Neighbor& a, const Neighbor& b) = default;
};

// Ascending by (distance, id); at most k entries, distinct ids.
using NeighborResult = std::vector<Neighbor>;

class ActionIndex {
 public:
  virtual ~ActionIndex() = default;

  // Thread-safe: the index is immutable after construction.
  virtual NeighborResult query(std::span<const double> proto, int k) const = 0;

  const ActionSet& actions() const { return *actions_; }
  std::shared_ptr<const ActionSet> shared_actions() const { return actions_; }
  const IndexConfig& config() const { return config_; }

  NeighborResult query(const Vector& proto, int k) const {
    return query(std::span<const double>(proto.data(), proto.size()), k);
  }

 protected:
  ActionIndex(std::shared_ptr<const ActionSet> actions, IndexConfig config);
  void check_query(std::span<const double> proto, int k) const;

 private:
  std::shared_ptr<const ActionSet> actions_;
  IndexConfig config_;
};

std::unique_ptr<ActionIndex> build_index(std::shared_ptr<const ActionSet> actions,
                                         const IndexConfig& config,
                                         std::uint64_t seed);

// Fraction of true k nearest neighbors (brute force) recovered by `index`
// over `num_queries` points drawn uniformly from the embedding bounding box.
double measure_recall(const ActionIndex& index, const ActionSet& actions,
                      int num_queries, int k, std::uint64_t seed);

}  // namespace wolp

#endif  // WOLP_ACTION_INDEX_HPP_
