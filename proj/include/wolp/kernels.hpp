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

#ifndef WOLP_KERNELS_HPP_
#define WOLP_KERNELS_HPP_

// Data-parallel hot loops. Every kernel has a serial reference and an
// OpenMP version that produce bit-identical results: work is split into
// fixed chunks (independent of the thread count) and recombined in chunk
// order.

#include <cstdint>
#include <span>
#include <vector>

#include "wolp/action_index.hpp"
#include "wolp/action_set.hpp"
#include "wolp/nn.hpp"

namespace wolp::kernels {

// Exact k nearest neighbors by linear scan, ties broken by smaller id.
NeighborResult knn_scan_serial(const ActionSet& actions,
                               std::span<const double> query, int k);
NeighborResult knn_scan_parallel(const ActionSet& actions,
                                 std::span<const double> query, int k);

// Q(state, a) for every id in `ids`, evaluated in column blocks of
// kScoreBlock candidates.
inline constexpr int kScoreBlock = 4096;
std::vector<double> score_actions_serial(const nn::Mlp& critic,
                                         const Vector& state,
                                         const ActionSet& actions,
                                         std::span<const ActionId> ids);
std::vector<double> score_actions_parallel(const nn::Mlp& critic,
                                           const Vector& state,
                                           const ActionSet& actions,
                                           std::span<const ActionId> ids);

// Sampling model of the expected-max analysis: k action values, each "bad"
// (value q - c) with probability p, otherwise uniform on [q - b, q + b].
struct MaxSampleStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t count = 0;
};
inline constexpr int kMonteCarloShards = 64;
MaxSampleStats sample_max_serial(double p, double b, double c, int k, double q,
                                 std::int64_t samples, std::uint64_t seed);
MaxSampleStats sample_max_parallel(double p, double b, double c, int k, double q,
                                   std::int64_t samples, std::uint64_t seed);

int max_threads();

// Raise the allocator's mmap threshold so the per-update network temporaries
// are recycled from the heap. No-op outside glibc.
void tune_allocator();

}  // namespace wolp::kernels

#endif  // WOLP_KERNELS_HPP_
