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

#include "wolp/lemma.hpp"

#include <cmath>
#include <stdexcept>

#include "wolp/kernels.hpp"

namespace wolp::lemma {

void LemmaScenario::validate() const {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("LemmaScenario: need 0 <= p < 1");
  if (!(b > 0.0)) throw std::invalid_argument("LemmaScenario: need b > 0");
  if (!(c >= b)) throw std::invalid_argument("LemmaScenario: need c >= b");
  if (k < 1) throw std::invalid_argument("LemmaScenario: need k >= 1");
}

double value_cdf(const LemmaScenario& s, double x) {
  const double bad = 0.5 - s.normalized_penalty();
  if (x < bad) return 0.0;
  if (x < 0.0) return s.p;
  if (x <= 1.0) return s.p + (1.0 - s.p) * x;
  return 1.0;
}

double max_cdf(const LemmaScenario& s, double x) {
  return std::pow(value_cdf(s, x), s.k);
}

double geometric_sum(double p, int k) {
  if (p < 0.5) {
    // Horner form of 1 + p + ... + p^k; exact as p -> 0.
    double acc = 1.0;
    for (int j = 0; j < k; ++j) {
      acc = 1.0 + p * acc;
    }
    return acc;
  }
  return -std::expm1(static_cast<double>(k + 1) * std::log(p)) / (1.0 - p);
}

double expected_max(const LemmaScenario& s) {
  s.validate();
  const double pk = std::pow(s.p, s.k);
  const double g = geometric_sum(s.p, s.k);
  return s.q + s.b - pk * s.c - s.b * (2.0 / (s.k + 1) * g - pk);
}

double expected_max_grouped(const LemmaScenario& s) {
  s.validate();
  return s.q + s.b - expected_gap(s);
}

double expected_gap(const LemmaScenario& s) {
  s.validate();
  const double pk = std::pow(s.p, s.k);
  return pk * (s.c - s.b) + 2.0 * s.b / (s.k + 1) * geometric_sum(s.p, s.k);
}

double expected_max_normalized(const LemmaScenario& s) {
  s.validate();
  const double pk = std::pow(s.p, s.k);
  return 1.0 + pk * (0.5 - s.normalized_penalty()) - geometric_sum(s.p, s.k) / (s.k + 1);
}

MonteCarloEstimate monte_carlo_max(const LemmaScenario& s, std::int64_t samples,
                                   std::uint64_t seed) {
  s.validate();
  if (samples < 1) throw std::invalid_argument("monte_carlo_max: samples must be >= 1");
  const auto stats = kernels::sample_max_parallel(s.p, s.b, s.c, s.k, s.q, samples, seed);
  const double n = static_cast<double>(stats.count);
  MonteCarloEstimate est;
  est.mean = stats.sum / n;
  const double var = n > 1 ? std::max(0.0, (stats.sum_sq - n * est.mean * est.mean) / (n - 1)) : 0.0;
  est.standard_error = std::sqrt(var / n);
  return est;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

PartsIdentity integration_by_parts_check(const LemmaScenario& s, double tol) {
  s.validate();
  const double p = s.p;
  const int k = s.k;
  // Density of the continuous part of F_max on [0, 1].
  auto density = [&](double x) {
    return k * (1.0 - p) * std::pow(p + (1.0 - p) * x, k - 1);
  };
  PartsIdentity out;
  // The bad-value atom sits at or below 0, so it adds nothing to x dF_max.
  out.stieltjes = adaptive_simpson([&](double x) { return x * density(x); }, 0.0, 1.0, tol);
  out.by_parts = (1.0 * max_cdf(s, 1.0) - 0.0 * max_cdf(s, 0.0)) -
                 adaptive_simpson([&](double x) { return max_cdf(s, x); }, 0.0, 1.0, tol);
  return out;
}

std::vector<CurvePoint> diminishing_returns_curve(const LemmaScenario& base,
                                                  const std::vector<int>& k_values) {
  std::vector<CurvePoint> out;
  double prev = 0.0;
  int prev_k = 0;
  for (int k : k_values) {
    if (k < 1 || k <= prev_k) {
      throw std::invalid_argument("diminishing_returns_curve: k values must ascend from 1");
    }
    LemmaScenario s = base;
    s.k = k;
    const double e = expected_max(s);
    out.push_back({k, e, out.empty() ? 0.0 : e - prev});
    prev = e;
    prev_k = k;
  }
  return out;
}

}  // namespace wolp::lemma
