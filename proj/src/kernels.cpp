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

#include "wolp/kernels.hpp"

#include <algorithm>
#include <queue>

#ifdef _OPENMP
#include <omp.h>
#endif
#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace wolp::kernels {
namespace {

constexpr std::int64_t kScanChunk = 16384;

// Bounded max-heap keeping the k smallest (distance, id) pairs.
class TopK {
 public:
  explicit TopK(int k) : k_(static_cast<std::size_t>(k)) {}

  void offer(ActionId id, double dist) {
    const Neighbor n{id, dist};
    if (heap_.size() < k_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (n < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = n;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  NeighborResult sorted() && {
    std::sort_heap(heap_.begin(), heap_.end());
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

NeighborResult scan_range(const ActionSet& actions, const double* q,
                          ActionId begin, ActionId end, int k) {
  const int dim = actions.dim();
  const std::int64_t n = end - begin;
  if (static_cast<std::int64_t>(k) * 4 >= n) {
    NeighborResult all;
    all.reserve(static_cast<std::size_t>(n));
    for (ActionId i = begin; i < end; ++i)
      all.push_back({i, squared_l2(actions[i].data(), q, dim)});
    const auto keep = std::min<std::size_t>(all.size(), static_cast<std::size_t>(k));
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end());
    all.resize(keep);
    return all;
  }
  TopK top(k);
  for (ActionId i = begin; i < end; ++i)
    top.offer(i, squared_l2(actions[i].data(), q, dim));
  return std::move(top).sorted();
}

Matrix critic_inputs(const Vector& state, const ActionSet& actions,
                     std::span<const ActionId> ids, std::size_t begin,
                     std::size_t end) {
  const int m = static_cast<int>(state.size());
  const int n = actions.dim();
  Matrix x(m + n, static_cast<Eigen::Index>(end - begin));
  for (std::size_t c = begin; c < end; ++c) {
    const auto col = static_cast<Eigen::Index>(c - begin);
    x.col(col).head(m) = state;
    auto emb = actions[ids[c]];
    for (int d = 0; d < n; ++d) x(m + d, col) = emb[d];
  }
  return x;
}

MaxSampleStats sample_shard(double p, double b, double c, int k, double q,
                            std::int64_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MaxSampleStats s;
  for (std::int64_t i = 0; i < samples; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const bool bad = unit(rng) < p;
      const double u = unit(rng);
      const double v = bad ? q - c : (q - b) + 2.0 * b * u;
      best = std::max(best, v);
    }
    s.sum += best;
    s.sum_sq += best * best;
  }
  s.count = samples;
  return s;
}

std::int64_t shard_size(std::int64_t samples, int shard) {
  const std::int64_t base = samples / kMonteCarloShards;
  return base + (shard < samples % kMonteCarloShards ? 1 : 0);
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
}

NeighborResult knn_scan_serial(const ActionSet& actions,
                               std::span<const double> query, int k) {
  return scan_range(actions, query.data(), 0, actions.size(), k);
}

NeighborResult knn_scan_parallel(const ActionSet& actions,
                                 std::span<const double> query, int k) {
  const std::int64_t n = actions.size();
  const std::int64_t chunks = (n + kScanChunk - 1) / kScanChunk;
  if (chunks <= 1) return knn_scan_serial(actions, query, k);
  std::vector<NeighborResult> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const auto begin = static_cast<ActionId>(c * kScanChunk);
    const auto end = static_cast<ActionId>(std::min(n, (c + 1) * kScanChunk));
    partial[static_cast<std::size_t>(c)] = scan_range(actions, query.data(), begin, end, k);
  }
  NeighborResult merged;
  for (auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  const auto keep = std::min<std::size_t>(merged.size(), static_cast<std::size_t>(k));
  std::partial_sort(merged.begin(), merged.begin() + static_cast<std::ptrdiff_t>(keep),
                    merged.end());
  merged.resize(keep);
  return merged;
}

std::vector<double> score_actions_serial(const nn::Mlp& critic,
                                         const Vector& state,
                                         const ActionSet& actions,
                                         std::span<const ActionId> ids) {
  std::vector<double> out(ids.size());
  for (std::size_t begin = 0; begin < ids.size(); begin += kScoreBlock) {
    const std::size_t end = std::min(ids.size(), begin + kScoreBlock);
    const Matrix q = critic.forward_batch(critic_inputs(state, actions, ids, begin, end));
    for (std::size_t i = begin; i < end; ++i)
      out[i] = q(0, static_cast<Eigen::Index>(i - begin));
  }
  return out;
}

std::vector<double> score_actions_parallel(const nn::Mlp& critic,
                                           const Vector& state,
                                           const ActionSet& actions,
                                           std::span<const ActionId> ids) {
  std::vector<double> out(ids.size());
  const auto blocks = static_cast<std::int64_t>((ids.size() + kScoreBlock - 1) / kScoreBlock);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    const std::size_t begin = static_cast<std::size_t>(blk) * kScoreBlock;
    const std::size_t end = std::min(ids.size(), begin + kScoreBlock);
    const Matrix q = critic.forward_batch(critic_inputs(state, actions, ids, begin, end));
    for (std::size_t i = begin; i < end; ++i)
      out[i] = q(0, static_cast<Eigen::Index>(i - begin));
  }
  return out;
}

MaxSampleStats sample_max_serial(double p, double b, double c, int k, double q,
                                 std::int64_t samples, std::uint64_t seed) {
  MaxSampleStats total;
  for (int s = 0; s < kMonteCarloShards; ++s) {
    const auto part = sample_shard(p, b, c, k, q, shard_size(samples, s),
                                   derive_seed(seed, static_cast<std::uint64_t>(s)));
    total.sum += part.sum;
    total.sum_sq += part.sum_sq;
    total.count += part.count;
  }
  return total;
}

MaxSampleStats sample_max_parallel(double p, double b, double c, int k, double q,
                                   std::int64_t samples, std::uint64_t seed) {
  std::vector<MaxSampleStats> parts(kMonteCarloShards);
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < kMonteCarloShards; ++s) {
    parts[static_cast<std::size_t>(s)] =
        sample_shard(p, b, c, k, q, shard_size(samples, s),
                     derive_seed(seed, static_cast<std::uint64_t>(s)));
  }
  MaxSampleStats total;
  for (const auto& part : parts) {
    total.sum += part.sum;
    total.sum_sq += part.sum_sq;
    total.count += part.count;
  }
  return total;
}

}  // namespace wolp::kernels
