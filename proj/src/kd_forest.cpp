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

// Randomized k-d forest. Each tree splits on a dimension drawn at random
// among the highest-variance ones (estimated on a sample of the node's
// points) at the sample mean. Queries descend every tree once and then
// continue best-bin-first from a shared priority queue until the leaf-check
// budget is spent and the result set is full.

#include <algorithm>
#include <numeric>

#include "index_impl.hpp"
#include "wolp/kernels.hpp"

namespace wolp::detail {
namespace {

constexpr int kVarianceSample = 100;
constexpr int kTopVarianceDims = 5;

struct KdNode {
  int split_dim = -1;  // -1 marks a leaf
  double split_value = 0.0;
  int left = -1;
  int right = -1;
  int begin = 0;  // leaf point range in the tree's permutation
  int end = 0;
};

struct KdTree {
  std::vector<KdNode> nodes;
  std::vector<ActionId> perm;
};

class KdForest final : public ActionIndex {
 public:
  KdForest(std::shared_ptr<const ActionSet> actions, const IndexConfig& config,
           std::uint64_t seed)
      : ActionIndex(std::move(actions), config) {
    Rng rng(seed);
    trees_.resize(static_cast<std::size_t>(config.trees));
    for (auto& tree : trees_) {
      tree.perm.resize(static_cast<std::size_t>(this->actions().size()));
      std::iota(tree.perm.begin(), tree.perm.end(), 0);
      std::shuffle(tree.perm.begin(), tree.perm.end(), rng);
      build(tree, 0, static_cast<int>(tree.perm.size()), rng);
    }
  }

  NeighborResult query(std::span<const double> proto, int k) const override {
    check_query(proto, k);
    // A budget that covers every point is the exhaustive scan.
    if (config().checks >= actions().size()) return kernels::knn_scan_serial(actions(), proto, k);
    const int want = std::min<int>(k, actions().size());
    ResultSet result(want, trees_.size() > 1);
    BranchQueue queue;
    int checks = 0;
    for (int t = 0; t < static_cast<int>(trees_.size()); ++t) {
      descend(t, 0, 0.0, proto.data(), result, queue, checks);
    }
    while (!queue.empty() && (checks < config().checks || !result.full())) {
      const Branch b = queue.top();
      queue.pop();
      if (result.full() && b.mindist > result.worst()) break;
      descend(b.tree, b.node, b.mindist, proto.data(), result, queue, checks);
    }
    return std::move(result).take();
  }

 private:
  int build(KdTree& tree, int begin, int end, Rng& rng) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    if (end - begin <= config().leaf_size) {
      tree.nodes[id].begin = begin;
      tree.nodes[id].end = end;
      return id;
    }
    const int dim = actions().dim();
    const int sample = std::min(kVarianceSample, end - begin);
    std::vector<double> mean(dim, 0.0), var(dim, 0.0);
    for (int i = begin; i < begin + sample; ++i) {
      auto p = actions()[tree.perm[i]];
      for (int d = 0; d < dim; ++d) mean[d] += p[d];
    }
    for (double& m : mean) m /= sample;
    for (int i = begin; i < begin + sample; ++i) {
      auto p = actions()[tree.perm[i]];
      for (int d = 0; d < dim; ++d) var[d] += (p[d] - mean[d]) * (p[d] - mean[d]);
    }
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    const int top = std::min(kTopVarianceDims, dim);
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](int a, int b) { return var[a] > var[b] || (var[a] == var[b] && a < b); });
    const int split_dim = order[std::uniform_int_distribution<int>(0, top - 1)(rng)];
    double split_value = mean[split_dim];

    auto value = [&](ActionId a) { return actions()[a][split_dim]; };
    auto mid_it = std::partition(tree.perm.begin() + begin, tree.perm.begin() + end,
                                 [&](ActionId a) { return value(a) < split_value; });
    int mid = static_cast<int>(mid_it - tree.perm.begin());
    if (mid == begin || mid == end) {
      // Sample mean did not separate the points; fall back to a median cut.
      mid = begin + (end - begin) / 2;
      std::nth_element(tree.perm.begin() + begin, tree.perm.begin() + mid,
                       tree.perm.begin() + end,
                       [&](ActionId a, ActionId b) { return value(a) < value(b); });
      split_value = value(tree.perm[mid]);
    }
    const int left = build(tree, begin, mid, rng);
    const int right = build(tree, mid, end, rng);
    KdNode& node = tree.nodes[id];
    node.split_dim = split_dim;
    node.split_value = split_value;
    node.left = left;
    node.right = right;
    return id;
  }

  void descend(int t, int node_id, double mindist, const double* q, ResultSet& result,
               BranchQueue& queue, int& checks) const {
    const KdTree& tree = trees_[t];
    const int dim = actions().dim();
    while (true) {
      if (result.full() && mindist > result.worst()) return;
      const KdNode& node = tree.nodes[node_id];
      if (node.split_dim < 0) {
        for (int i = node.begin; i < node.end; ++i) {
          if (checks >= config().checks && result.full()) return;
          const ActionId a = tree.perm[i];
          if (result.add(a, squared_l2(actions()[a].data(), q, dim))) ++checks;
        }
        return;
      }
      const double diff = q[node.split_dim] - node.split_value;
      const int best = diff < 0 ? node.left : node.right;
      const int other = diff < 0 ? node.right : node.left;
      const double other_dist = mindist + diff * diff;
      if (!result.full() || other_dist <= result.worst()) {
        queue.push({t, other, other_dist});
      }
      node_id = best;
    }
  }

  std::vector<KdTree> trees_;
};

}  // namespace

std::unique_ptr<ActionIndex> make_kd_forest(std::shared_ptr<const ActionSet> actions,
                                            const IndexConfig& config,
                                            std::uint64_t seed) {
  return std::make_unique<KdForest>(std::move(actions), config, seed);
}

}  // namespace wolp::detail
