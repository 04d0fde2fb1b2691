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

#ifndef WOLP_LEMMA_HPP_
#define WOLP_LEMMA_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace wolp::lemma {

// Value model for the k actions nearest a proto-action: each is "bad" with
// probability p (value q - c), otherwise uniform on [q - b, q + b].
struct LemmaScenario {
  double p = 0.0;
  double b = 0.5;
  double c = 0.5;
  int k = 1;
  double q = 0.0;

  // Throws std::invalid_argument unless 0 <= p < 1, 0 < b <= c, k >= 1.
  void validate() const;
  // c' = c / 2b, the penalty in normalized coordinates.
  double normalized_penalty() const { return c / (2.0 * b); }
};

// Single-action CDF in normalized coordinates (q = 1/2, b = 1/2). The bad
// value sits at 1/2 - c', the image of q - c.
double value_cdf(const LemmaScenario& s, double x);
// CDF of the maximum of k i.i.d. values: value_cdf^k.
double max_cdf(const LemmaScenario& s, double x);

// sum_{j=0}^{k} p^j, i.e. (1 - p^{k+1}) / (1 - p), stable as p -> 0.
double geometric_sum(double p, int k);

// Closed form: q + b - p^k c - b (2/(k+1) * (1-p^{k+1})/(1-p) - p^k).
double expected_max(const LemmaScenario& s);
// Same quantity grouped as q + b - p^k (c - b) - 2b/(k+1) * (1-p^{k+1})/(1-p).
double expected_max_grouped(const LemmaScenario& s);
// Expected shortfall from the best attainable value q + b:
// p^k (c - b) + 2b/(k+1) * (1-p^{k+1})/(1-p).
double expected_gap(const LemmaScenario& s);
// The normalized-coordinate expectation 1 + p^k (1/2 - c') - G/(k+1).
double expected_max_normalized(const LemmaScenario& s);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};
// Direct sampling of the value model; sharded across threads with
// per-shard streams, so the result depends only on (scenario, samples, seed).
MonteCarloEstimate monte_carlo_max(const LemmaScenario& s, std::int64_t samples,
                                   std::uint64_t seed);

// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

// Both sides of the integration-by-parts identity on [0, 1] in normalized
// coordinates: the Stieltjes integral of x dF_max (computed as the integral of
// x f_max(x) with the density of the continuous part) and
// [x F_max]_0^1 - integral F_max.
struct PartsIdentity {
  double stieltjes = 0.0;
  double by_parts = 0.0;
};
PartsIdentity integration_by_parts_check(const LemmaScenario& s, double tol = 1e-10);

struct CurvePoint {
  int k = 0;
  double expected_max = 0.0;
  double marginal_gain = 0.0;  // E(k) - E(previous k); 0 for the first point
};
// `k_values` must be strictly ascending and >= 1.
std::vector<CurvePoint> diminishing_returns_curve(const LemmaScenario& base,
                                                  const std::vector<int>& k_values);

}  // namespace wolp::lemma

#endif  // WOLP_LEMMA_HPP_
