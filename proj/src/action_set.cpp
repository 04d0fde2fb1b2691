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

#include "wolp/action_set.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "wolp/csv.hpp"

namespace wolp {

ActionSet::ActionSet(int dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ <= 0) throw DimensionError("ActionSet: dimension must be positive");
  if (values_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw DimensionError("ActionSet: value count is not a multiple of dim");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericError("ActionSet: non-finite embedding");
  }
}

ActionSet ActionSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DimensionError("ActionSet: no rows");
  const std::size_t dim = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    require_dim(r.size(), dim, "ActionSet::from_rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return ActionSet(static_cast<int>(dim), std::move(values));
}

ActionSet ActionSet::load_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv_file(path, /*has_header=*/false);
  std::map<long long, std::vector<double>> rows;
  std::size_t dim = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& fields = table.rows[r];
    if (fields.empty()) continue;
    long long id = 0;
    const auto& f0 = fields[0];
    auto [ptr, ec] = std::from_chars(f0.data(), f0.data() + f0.size(), id);
    if (ec != std::errc() || ptr != f0.data() + f0.size()) {
      if (r == 0) continue;  // header
      throw std::runtime_error("ActionSet CSV: bad id '" + f0 + "' on line " +
                               std::to_string(r + 1));
    }
    if (fields.size() < 2) throw DimensionError("ActionSet CSV: missing embedding");
    if (dim == 0) dim = fields.size() - 1;
    require_dim(fields.size() - 1, dim, "ActionSet CSV row");
    std::vector<double> v;
    for (std::size_t c = 1; c < fields.size(); ++c) v.push_back(std::stod(fields[c]));
    if (!rows.emplace(id, std::move(v)).second) {
      throw std::runtime_error("ActionSet CSV: duplicate id " + std::to_string(id));
    }
  }
  if (rows.empty()) throw DimensionError("ActionSet CSV: no actions");
  std::vector<double> values;
  long long expect = 0;
  for (auto& [id, v] : rows) {
    if (id != expect++) throw std::runtime_error("ActionSet CSV: ids are not dense 0..N-1");
    values.insert(values.end(), v.begin(), v.end());
  }
  return ActionSet(static_cast<int>(dim), std::move(values));
}

void ActionSet::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ActionSet: cannot write " + path.string());
  out << std::setprecision(17);
  for (ActionId i = 0; i < size(); ++i) {
    out << i;
    for (double v : (*this)[i]) out << ',' << v;
    out << '\n';
  }
}

Vector ActionSet::embedding(ActionId id) const {
  auto row = (*this)[id];
  return Eigen::Map<const Vector>(row.data(), dim_);
}

Vector ActionSet::lower_bound() const {
  Vector lo = Vector::Constant(dim_, std::numeric_limits<double>::infinity());
  for (ActionId i = 0; i < size(); ++i)
    for (int d = 0; d < dim_; ++d) lo(d) = std::min(lo(d), (*this)[i][d]);
  return lo;
}

Vector ActionSet::upper_bound() const {
  Vector hi = Vector::Constant(dim_, -std::numeric_limits<double>::infinity());
  for (ActionId i = 0; i < size(); ++i)
    for (int d = 0; d < dim_; ++d) hi(d) = std::max(hi(d), (*this)[i][d]);
  return hi;
}

}  // namespace wolp
