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

#ifndef WOLP_ACTION_SET_HPP_
#define WOLP_ACTION_SET_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "wolp/types.hpp"

namespace wolp {

// Embedded discrete action set: ActionId i maps to row i of a dense
// |A| x dim table.
class ActionSet {
 public:
  ActionSet() = default;
  // `values` is row-major, size() * dim entries.
  ActionSet(int dim, std::vector<double> values);

  static ActionSet from_rows(const std::vector<std::vector<double>>& rows);

  // CSV: integer ActionId then `dim` columns. Rows may come in any order but
  // the ids must be exactly 0..N-1. An optional header line is skipped when
  // its first field is not an integer.
  static ActionSet load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

  int dim() const { return dim_; }
  ActionId size() const { return static_cast<ActionId>(values_.size() / dim_); }
  bool empty() const { return values_.empty(); }

  std::span<const double> operator[](ActionId id) const {
    return {values_.data() + static_cast<std::size_t>(id) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  const double* data() const { return values_.data(); }
  Vector embedding(ActionId id) const;
  bool contains(ActionId id) const { return id >= 0 && id < size(); }

  // Per-dimension min / max over all embeddings.
  Vector lower_bound() const;
  Vector upper_bound() const;

 private:
  int dim_ = 1;
  std::vector<double> values_;
};

inline double squared_l2(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace wolp

#endif  // WOLP_ACTION_SET_HPP_
