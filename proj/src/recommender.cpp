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

#include "wolp/recommender.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>

namespace wolp {
namespace {

constexpr char kMagic[4] = {'W', 'R', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;
// Softmax temperature on cosine similarity and logit of the reject option.
constexpr double kAffinityScale = 8.0;
constexpr double kRejectLogit = 0.6 * kAffinityScale;
constexpr int kLatentRank = 4;

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("RecommenderData: truncated file");
  return v;
}

}  // namespace

void RecommenderData::validate() const {
  if (num_items < 2) throw std::invalid_argument("RecommenderData: need at least 2 items");
  if (dim < 1) throw std::invalid_argument("RecommenderData: embedding dim must be >= 1");
  require_dim(embeddings.size(), static_cast<std::size_t>(num_items) * dim, "RecommenderData embeddings");
  require_dim(rewards.size(), static_cast<std::size_t>(num_items), "RecommenderData rewards");
  require_dim(acceptance.size(), static_cast<std::size_t>(num_items), "RecommenderData rows");
  for (double v : embeddings)
    if (!std::isfinite(v)) throw NumericError("RecommenderData: non-finite embedding");
  for (double v : rewards)
    if (!std::isfinite(v)) throw NumericError("RecommenderData: non-finite reward");
  for (const auto& row : acceptance) {
    double sum = 0.0;
    ActionId prev = -1;
    for (const auto& [j, w] : row) {
      if (j <= prev || j >= num_items) throw std::invalid_argument("RecommenderData: bad column order");
      if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("RecommenderData: W outside [0, 1]");
      sum += w;
      prev = j;
    }
    if (sum > 1.0 + 1e-9) throw std::invalid_argument("RecommenderData: row sum exceeds 1");
  }
}

double RecommenderData::w(ActionId i, ActionId j) const {
  const auto& row = acceptance.at(static_cast<std::size_t>(i));
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const auto& e, ActionId v) { return e.first < v; });
  return (it != row.end() && it->first == j) ? it->second : 0.0;
}

void RecommenderData::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("RecommenderData: cannot write " + path.string());
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(num_items));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  std::uint64_t nnz = 0;
  for (const auto& row : acceptance) nnz += row.size();
  put<std::uint64_t>(out, nnz);
  for (double v : embeddings) put<double>(out, v);
  for (std::size_t i = 0; i < acceptance.size(); ++i) {
    for (const auto& [j, w] : acceptance[i]) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(j));
      put<double>(out, w);
    }
  }
  for (double v : rewards) put<double>(out, v);
}

RecommenderData RecommenderData::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("RecommenderData: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("RecommenderData: bad magic");
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("RecommenderData: bad version");
  RecommenderData d;
  d.num_items = static_cast<int>(get<std::uint32_t>(in));
  d.dim = static_cast<int>(get<std::uint32_t>(in));
  const auto nnz = get<std::uint64_t>(in);
  d.embeddings.resize(static_cast<std::size_t>(d.num_items) * d.dim);
  for (double& v : d.embeddings) v = get<double>(in);
  d.acceptance.resize(static_cast<std::size_t>(d.num_items));
  for (std::uint64_t e = 0; e < nnz; ++e) {
    const auto i = get<std::uint32_t>(in);
    const auto j = get<std::uint32_t>(in);
    const auto w = get<double>(in);
    if (i >= static_cast<std::uint32_t>(d.num_items)) throw std::runtime_error("RecommenderData: bad row");
    d.acceptance[i].emplace_back(static_cast<ActionId>(j), w);
  }
  d.rewards.resize(static_cast<std::size_t>(d.num_items));
  for (double& v : d.rewards) v = get<double>(in);
  d.validate();
  return d;
}

RecommenderSim::RecommenderSim(RecommenderData data, RecommenderOptions options)
    : options_(options) {
  data.validate();
  actions_ = std::make_shared<const ActionSet>(data.dim, data.embeddings);
  auto guided = std::make_shared<std::vector<std::vector<ActionId>>>(data.num_items);
  for (int i = 0; i < data.num_items; ++i) {
    auto row = data.acceptance[i];
    std::stable_sort(row.begin(), row.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const auto keep = std::min<std::size_t>(row.size(), static_cast<std::size_t>(options.guided_subset_size));
    for (std::size_t e = 0; e < keep; ++e) (*guided)[i].push_back(row[e].first);
  }
  guided_ = std::move(guided);
  data_ = std::make_shared<const RecommenderData>(std::move(data));
}

Vector RecommenderSim::reset() {
  current_ = std::uniform_int_distribution<ActionId>(0, data_->num_items - 1)(rng_);
  done_ = false;
  last_accepted_ = false;
  return actions_->embedding(current_);
}

void RecommenderSim::set_current_item(ActionId item) {
  if (!actions_->contains(item)) throw DimensionError("RecommenderSim: invalid item");
  current_ = item;
  done_ = false;
}

EnvStep RecommenderSim::step(ActionId recommended) {
  if (done_) throw std::logic_error("RecommenderSim::step: episode has ended");
  if (!actions_->contains(recommended)) throw DimensionError("RecommenderSim::step: invalid item id");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  EnvStep out;
  const double accept_draw = unit(rng_);
  const double end_draw = unit(rng_);
  if (accept_draw < data_->w(current_, recommended)) {
    current_ = recommended;
    out.reward = data_->rewards[recommended];
    out.terminal = end_draw < options_.accept_end_probability;
    last_accepted_ = true;
  } else {
    current_ = std::uniform_int_distribution<ActionId>(0, data_->num_items - 1)(rng_);
    out.reward = 0.0;
    out.terminal = end_draw < options_.reject_end_probability;
    last_accepted_ = false;
  }
  done_ = out.terminal;
  out.observation = actions_->embedding(current_);
  return out;
}

std::span<const ActionId> RecommenderSim::guided_actions() const {
  return (*guided_)[static_cast<std::size_t>(current_)];
}

std::unique_ptr<Environment> RecommenderSim::clone() const {
  return std::make_unique<RecommenderSim>(*this);
}

RecommenderData synth_recommender(int num_items, int embed_dim, int neighbors_per_item,
                                  std::uint64_t seed) {
  if (num_items < 2) throw std::invalid_argument("synth_recommender: need at least 2 items");
  if (embed_dim < 1) throw std::invalid_argument("synth_recommender: embed_dim must be >= 1");
  if (neighbors_per_item < 1) throw std::invalid_argument("synth_recommender: neighbors_per_item must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto normalize = [](std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0) for (double& x : v) x /= n;
  };

  // Latent clusters live in a rank-r subspace, mapped into R^embed_dim by a
  // random orthonormal basis, so every embedding has unit norm.
  const int rank = std::min(kLatentRank, embed_dim);
  Matrix basis(embed_dim, rank);
  for (int c = 0; c < rank; ++c)
    for (int r = 0; r < embed_dim; ++r) basis(r, c) = normal(rng);
  basis = Matrix(basis.householderQr().householderQ()) * Matrix::Identity(embed_dim, rank);

  const int clusters = std::max(2, static_cast<int>(std::lround(std::sqrt(num_items) / 2.0)));
  std::vector<std::vector<double>> centers(clusters, std::vector<double>(rank));
  for (auto& c : centers) {
    for (double& x : c) x = normal(rng);
    normalize(c);
  }
  RecommenderData d;
  d.num_items = num_items;
  d.dim = embed_dim;
  d.embeddings.reserve(static_cast<std::size_t>(num_items) * embed_dim);
  const double spread = 0.5 / std::sqrt(static_cast<double>(rank));
  for (int i = 0; i < num_items; ++i) {
    const auto& c = centers[std::uniform_int_distribution<int>(0, clusters - 1)(rng)];
    std::vector<double> z(rank);
    for (int t = 0; t < rank; ++t) z[t] = c[t] + spread * normal(rng);
    normalize(z);
    const Vector e = basis * Eigen::Map<const Vector>(z.data(), rank);
    d.embeddings.insert(d.embeddings.end(), e.data(), e.data() + embed_dim);
  }
  d.rewards.resize(static_cast<std::size_t>(num_items));
  for (double& r : d.rewards) r = unit(rng);

  const int q = std::min(neighbors_per_item, num_items - 1);
  d.acceptance.resize(static_cast<std::size_t>(num_items));
  std::vector<std::pair<double, ActionId>> sims(static_cast<std::size_t>(num_items - 1));
  for (int i = 0; i < num_items; ++i) {
    const double* ei = d.embeddings.data() + static_cast<std::size_t>(i) * embed_dim;
    std::size_t n = 0;
    for (int j = 0; j < num_items; ++j) {
      if (j == i) continue;
      const double* ej = d.embeddings.data() + static_cast<std::size_t>(j) * embed_dim;
      double dot = 0.0;
      for (int t = 0; t < embed_dim; ++t) dot += ei[t] * ej[t];
      sims[n++] = {-dot, j};  // ascending = most similar first, ties by id
    }
    std::partial_sort(sims.begin(), sims.begin() + q, sims.end());
    double z = std::exp(kRejectLogit);
    for (int t = 0; t < q; ++t) z += std::exp(-kAffinityScale * sims[t].first);
    auto& row = d.acceptance[i];
    for (int t = 0; t < q; ++t) row.emplace_back(sims[t].second, std::exp(-kAffinityScale * sims[t].first) / z);
    std::sort(row.begin(), row.end());
  }
  d.validate();
  return d;
}

}  // namespace wolp
