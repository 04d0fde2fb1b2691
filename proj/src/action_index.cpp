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

#include "wolp/action_index.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "index_impl.hpp"
#include "wolp/kernels.hpp"

namespace wolp {

std::string to_string(IndexTier tier) {
  switch (tier) {
    case IndexTier::kExact: return "exact";
    case IndexTier::kSlow: return "slow";
    case IndexTier::kMedium: return "medium";
    case IndexTier::kFast: return "fast";
  }
  return "unknown";
}

IndexTier parse_tier(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (s == "exact") return IndexTier::kExact;
  if (s == "slow") return IndexTier::kSlow;
  if (s == "medium") return IndexTier::kMedium;
  if (s == "fast") return IndexTier::kFast;
  throw std::invalid_argument("unknown index tier '" + name + "'");
}

IndexConfig IndexConfig::for_tier(IndexTier tier) {
  IndexConfig c;
  c.tier = tier;
  switch (tier) {
    case IndexTier::kExact:
      break;
    case IndexTier::kSlow:
      c.branching = 16;
      c.checks = 2048;
      break;
    case IndexTier::kMedium:
      c.trees = 4;
      c.checks = 39;
      break;
    case IndexTier::kFast:
      c.trees = 1;
      c.checks = 1;
      break;
  }
  return c;
}

void IndexConfig::validate() const {
  if (branching < 2) throw std::invalid_argument("IndexConfig: branching must be >= 2");
  if (checks < 1) throw std::invalid_argument("IndexConfig: checks must be >= 1");
  if (trees < 1) throw std::invalid_argument("IndexConfig: trees must be >= 1");
  if (leaf_size < 1) throw std::invalid_argument("IndexConfig: leaf_size must be >= 1");
  if (kmeans_iterations < 1) {
    throw std::invalid_argument("IndexConfig: kmeans_iterations must be >= 1");
  }
}

ActionIndex::ActionIndex(std::shared_ptr<const ActionSet> actions, IndexConfig config)
    : actions_(std::move(actions)), config_(config) {}

void ActionIndex::check_query(std::span<const double> proto, int k) const {
  require_dim(proto.size(), static_cast<std::size_t>(actions_->dim()), "ActionIndex::query");
  if (k < 1) throw DimensionError("ActionIndex::query: k must be >= 1");
}

namespace detail {
namespace {

class ExactIndex final : public ActionIndex {
 public:
  ExactIndex(std::shared_ptr<const ActionSet> actions, const IndexConfig& config)
      : ActionIndex(std::move(actions), config) {}

  NeighborResult query(std::span<const double> proto, int k) const override {
    check_query(proto, k);
    return config().parallel_scan ? kernels::knn_scan_parallel(actions(), proto, k)
                                  : kernels::knn_scan_serial(actions(), proto, k);
  }
};

}  // namespace

std::unique_ptr<ActionIndex> make_exact_index(std::shared_ptr<const ActionSet> actions,
                                              const IndexConfig& config) {
  return std::make_unique<ExactIndex>(std::move(actions), config);
}

}  // namespace detail

std::unique_ptr<ActionIndex> build_index(std::shared_ptr<const ActionSet> actions,
                                         const IndexConfig& config,
                                         std::uint64_t seed) {
  if (!actions || actions->empty()) {
    throw std::invalid_argument("build_index: empty action set");
  }
  config.validate();
  switch (config.tier) {
    case IndexTier::kExact:
      return detail::make_exact_index(std::move(actions), config);
    case IndexTier::kSlow:
      return detail::make_kmeans_tree(std::move(actions), config, seed);
    case IndexTier::kMedium:
    case IndexTier::kFast:
      return detail::make_kd_forest(std::move(actions), config, seed);
  }
  throw std::invalid_argument("build_index: unknown tier");
}

double measure_recall(const ActionIndex& index, const ActionSet& actions,
                      int num_queries, int k, std::uint64_t seed) {
  if (num_queries < 1) throw std::invalid_argument("measure_recall: num_queries must be >= 1");
  if (k < 1) throw DimensionError("measure_recall: k must be >= 1");
  const Vector lo = actions.lower_bound();
  const Vector hi = actions.upper_bound();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::int64_t hits = 0, total = 0;
  Vector q(actions.dim());
  for (int i = 0; i < num_queries; ++i) {
    for (int d = 0; d < actions.dim(); ++d) q(d) = lo(d) + (hi(d) - lo(d)) * unit(rng);
    const auto truth = kernels::knn_scan_serial(actions, {q.data(), static_cast<std::size_t>(q.size())}, k);
    const auto got = index.query(q, k);
    std::unordered_set<ActionId> got_ids;
    for (const auto& n : got) got_ids.insert(n.id);
    for (const auto& n : truth) hits += got_ids.count(n.id);
    total += static_cast<std::int64_t>(truth.size());
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace wolp
