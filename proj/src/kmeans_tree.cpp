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

// Hierarchical k-means tree. Every interior node clusters its points into
// `branching` groups with Lloyd iterations from random distinct seeds;
// nodes with fewer than `branching` points become leaves. Search descends to
// the nearest child center, queues the siblings by center distance and keeps
// popping best-bin-first until the check budget is spent and k results are
// held. A cluster whose bounding ball cannot beat the current k-th distance
// is skipped.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "index_impl.hpp"
#include "wolp/kernels.hpp"

namespace wolp::detail {
namespace {

struct KmNode {
  std::vector<double> center;
  double radius = 0.0;  // Euclidean
  std::vector<int> children;
  int begin = 0;  // leaf point range in perm_
  int end = 0;
  bool leaf() const { return children.empty(); }
};

class KMeansTree final : public ActionIndex {
 public:
  KMeansTree(std::shared_ptr<const ActionSet> actions, const IndexConfig& config,
             std::uint64_t seed)
      : ActionIndex(std::move(actions), config) {
    Rng rng(seed);
    perm_.resize(static_cast<std::size_t>(this->actions().size()));
    std::iota(perm_.begin(), perm_.end(), 0);
    build(0, static_cast<int>(perm_.size()), rng);
  }

  NeighborResult query(std::span<const double> proto, int k) const override {
    check_query(proto, k);
    // A budget that covers every point is the exhaustive scan.
    if (config().checks >= actions().size()) return kernels::knn_scan_serial(actions(), proto, k);
    const int want = std::min<int>(k, actions().size());
    ResultSet result(want, false);
    BranchQueue queue;
    int checks = 0;
    descend(0, proto.data(), result, queue, checks);
    while (!queue.empty() && (checks < config().checks || !result.full())) {
      const Branch b = queue.top();
      queue.pop();
      descend(b.node, proto.data(), result, queue, checks);
    }
    return std::move(result).take();
  }

 private:
  int build(int begin, int end, Rng& rng) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const int dim = actions().dim();
    const int count = end - begin;

    std::vector<double> center(dim, 0.0);
    for (int i = begin; i < end; ++i) {
      auto p = actions()[perm_[i]];
      for (int d = 0; d < dim; ++d) center[d] += p[d];
    }
    for (double& c : center) c /= count;
    double radius_sq = 0.0;
    for (int i = begin; i < end; ++i) {
      radius_sq = std::max(radius_sq, squared_l2(actions()[perm_[i]].data(), center.data(), dim));
    }
    nodes_[id].center = std::move(center);
    nodes_[id].radius = std::sqrt(radius_sq);
    nodes_[id].begin = begin;
    nodes_[id].end = end;

    const int branching = config().branching;
    if (count < branching) return id;

    // Lloyd iterations from `branching` random distinct seed points.
    std::vector<int> seeds(count);
    std::iota(seeds.begin(), seeds.end(), begin);
    for (int j = 0; j < branching; ++j) {
      const int pick = std::uniform_int_distribution<int>(j, count - 1)(rng);
      std::swap(seeds[j], seeds[pick]);
    }
    std::vector<double> centers(static_cast<std::size_t>(branching) * dim);
    for (int j = 0; j < branching; ++j) {
      auto p = actions()[perm_[seeds[j]]];
      std::copy(p.begin(), p.end(), centers.begin() + static_cast<std::ptrdiff_t>(j) * dim);
    }
    std::vector<int> assign(count, -1);
    std::vector<int> sizes(branching, 0);
    for (int iter = 0; iter < config().kmeans_iterations; ++iter) {
      bool changed = false;
      for (int i = 0; i < count; ++i) {
        const double* p = actions()[perm_[begin + i]].data();
        int best = 0;
        double best_d = squared_l2(p, centers.data(), dim);
        for (int j = 1; j < branching; ++j) {
          const double d = squared_l2(p, centers.data() + static_cast<std::ptrdiff_t>(j) * dim, dim);
          if (d < best_d) {
            best_d = d;
            best = j;
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
      }
      if (!changed) break;
      std::fill(centers.begin(), centers.end(), 0.0);
      std::fill(sizes.begin(), sizes.end(), 0);
      for (int i = 0; i < count; ++i) {
        auto p = actions()[perm_[begin + i]];
        double* c = centers.data() + static_cast<std::ptrdiff_t>(assign[i]) * dim;
        for (int d = 0; d < dim; ++d) c[d] += p[d];
        ++sizes[assign[i]];
      }
      for (int j = 0; j < branching; ++j) {
        double* c = centers.data() + static_cast<std::ptrdiff_t>(j) * dim;
        if (sizes[j] > 0) {
          for (int d = 0; d < dim; ++d) c[d] /= sizes[j];
        } else {
          // Re-seed an empty cluster on a random point.
          auto p = actions()[perm_[begin + std::uniform_int_distribution<int>(0, count - 1)(rng)]];
          std::copy(p.begin(), p.end(), c);
        }
      }
    }

    // Group the permutation by cluster (stable, so builds are reproducible).
    std::vector<ActionId> grouped;
    grouped.reserve(count);
    std::vector<int> bounds{begin};
    for (int j = 0; j < branching; ++j) {
      for (int i = 0; i < count; ++i)
        if (assign[i] == j) grouped.push_back(perm_[begin + i]);
      if (begin + static_cast<int>(grouped.size()) != bounds.back())
        bounds.push_back(begin + static_cast<int>(grouped.size()));
    }
    if (bounds.size() <= 2) return id;  // all points in one cluster: duplicates
    std::copy(grouped.begin(), grouped.end(), perm_.begin() + begin);
    std::vector<int> children;
    for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
      children.push_back(build(bounds[j], bounds[j + 1], rng));
    }
    nodes_[id].children = std::move(children);
    return id;
  }

  void descend(int node_id, const double* q, ResultSet& result, BranchQueue& queue,
               int& checks) const {
    const int dim = actions().dim();
    while (true) {
      const KmNode& node = nodes_[node_id];
      if (result.full()) {
        const double to_center = std::sqrt(squared_l2(q, node.center.data(), dim));
        if (to_center - node.radius > std::sqrt(result.worst())) return;
      }
      if (node.leaf()) {
        for (int i = node.begin; i < node.end; ++i) {
          if (checks >= config().checks && result.full()) return;
          const ActionId a = perm_[i];
          result.add(a, squared_l2(actions()[a].data(), q, dim));
          ++checks;
        }
        return;
      }
      int best = node.children.front();
      double best_d = squared_l2(q, nodes_[best].center.data(), dim);
      for (std::size_t j = 1; j < node.children.size(); ++j) {
        const int c = node.children[j];
        const double d = squared_l2(q, nodes_[c].center.data(), dim);
        if (d < best_d) {
          queue.push({0, best, best_d});
          best_d = d;
          best = c;
        } else {
          queue.push({0, c, d});
        }
      }
      node_id = best;
    }
  }

  std::vector<KmNode> nodes_;
  std::vector<ActionId> perm_;
};

}  // namespace

std::unique_ptr<ActionIndex> make_kmeans_tree(std::shared_ptr<const ActionSet> actions,
                                              const IndexConfig& config,
                                              std::uint64_t seed) {
  return std::make_unique<KMeansTree>(std::move(actions), config, seed);
}

}  // namespace wolp::detail
