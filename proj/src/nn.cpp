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

#include "wolp/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace wolp::nn {
namespace {

Matrix activate(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kIdentity:
      break;
  }
  return z;
}

// d(act)/dz given the pre-activation z and activation a.
Matrix activation_derivative(const Matrix& z, const Matrix& a, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - a.array().square()).matrix();
    case Activation::kIdentity:
      break;
  }
  return Matrix::Ones(z.rows(), z.cols());
}

constexpr char kMagic[4] = {'W', 'O', 'L', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "snapshot writer assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("snapshot: truncated stream");
  return value;
}

}  // namespace

double GradientBundle::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

bool GradientBundle::all_finite() const {
  for (const auto& w : weights)
    if (!w.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return input.allFinite();
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation hidden, Activation output)
    : layer_sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
  if (layer_sizes_.size() < 2) {
    throw DimensionError("Mlp: need at least input and output sizes");
  }
  for (int s : layer_sizes_) {
    if (s <= 0) throw DimensionError("Mlp: layer sizes must be positive");
  }
  for (std::size_t i = 0; i + 1 < layer_sizes_.size(); ++i) {
    weights_.push_back(Matrix::Zero(layer_sizes_[i + 1], layer_sizes_[i]));
    biases_.push_back(Vector::Zero(layer_sizes_[i + 1]));
  }
}

Mlp Mlp::random(std::vector<int> layer_sizes, Activation hidden,
                Activation output, Rng& rng) {
  Mlp net(std::move(layer_sizes), hidden, output);
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.layer_sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < net.weights_[l].cols(); ++j)
      for (Eigen::Index i = 0; i < net.weights_[l].rows(); ++i)
        net.weights_[l](i, j) = dist(rng);
    for (Eigen::Index i = 0; i < net.biases_[l].size(); ++i)
      net.biases_[l](i) = dist(rng);
  }
  return net;
}

void Mlp::set_output_bounds(const Vector& low, const Vector& high) {
  require_dim(low.size(), output_size(), "Mlp::set_output_bounds low");
  require_dim(high.size(), output_size(), "Mlp::set_output_bounds high");
  if (output_ != Activation::kTanh) {
    throw DimensionError("Mlp: output bounds need a tanh output layer");
  }
  out_center_ = 0.5 * (low + high);
  out_half_ = 0.5 * (high - low);
}

Matrix Mlp::run(const Matrix& inputs, Tape* tape) const {
  if (inputs.rows() != input_size()) {
    throw DimensionError("Mlp: input has " + std::to_string(inputs.rows()) +
                         " rows, network expects " +
                         std::to_string(input_size()));
  }
  Matrix x = inputs;
  for (int l = 0; l < num_layers(); ++l) {
    Matrix z = weights_[l] * x;
    z.colwise() += biases_[l];
    const Activation act = (l + 1 == num_layers()) ? output_ : hidden_;
    Matrix a = activate(z, act);
    if (tape != nullptr) {
      tape->pre.push_back(std::move(z));
      tape->post.push_back(a);
    }
    x = std::move(a);
  }
  if (has_output_bounds()) {
    x = (x.array().colwise() * out_half_.array()).matrix();
    x.colwise() += out_center_;
  }
  return x;
}

Vector Mlp::forward(const Vector& input) const {
  require_dim(input.size(), input_size(), "Mlp::forward");
  return run(input, nullptr).col(0);
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  return run(inputs, nullptr);
}

GradientBundle Mlp::backward(const Vector& input,
                             const Vector& output_grad) const {
  require_dim(input.size(), input_size(), "Mlp::backward input");
  require_dim(output_grad.size(), output_size(), "Mlp::backward output_grad");
  return backward_batch(input, output_grad);
}

GradientBundle Mlp::backward_batch(const Matrix& inputs,
                                   const Matrix& output_grads) const {
  if (output_grads.rows() != output_size() ||
      output_grads.cols() != inputs.cols()) {
    throw DimensionError("Mlp::backward_batch: output gradient shape mismatch");
  }
  Tape tape;
  run(inputs, &tape);

  GradientBundle g;
  g.weights.resize(num_layers());
  g.biases.resize(num_layers());

  Matrix delta = output_grads;
  if (has_output_bounds()) {
    delta = (delta.array().colwise() * out_half_.array()).matrix();
  }
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Activation act = (l + 1 == num_layers()) ? output_ : hidden_;
    delta = delta.cwiseProduct(activation_derivative(tape.pre[l], tape.post[l], act));
    const Matrix& layer_in = (l == 0) ? inputs : tape.post[l - 1];
    g.weights[l] = delta * layer_in.transpose();
    g.biases[l] = delta.rowwise().sum();
    delta = weights_[l].transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l)
    n += weights_[l].size() + biases_[l].size();
  return n;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (int l = 0; l < num_layers(); ++l) {
    out.insert(out.end(), weights_[l].data(),
               weights_[l].data() + weights_[l].size());
    out.insert(out.end(), biases_[l].data(),
               biases_[l].data() + biases_[l].size());
  }
  return out;
}

void Mlp::set_flat_parameters(const std::vector<double>& params) {
  require_dim(params.size(), parameter_count(), "Mlp::set_flat_parameters");
  std::size_t pos = 0;
  for (int l = 0; l < num_layers(); ++l) {
    std::memcpy(weights_[l].data(), params.data() + pos,
                sizeof(double) * weights_[l].size());
    pos += weights_[l].size();
    std::memcpy(biases_[l].data(), params.data() + pos,
                sizeof(double) * biases_[l].size());
    pos += biases_[l].size();
  }
}

bool Mlp::same_architecture(const Mlp& other) const {
  return layer_sizes_ == other.layer_sizes_ && hidden_ == other.hidden_ &&
         output_ == other.output_;
}

bool Mlp::all_finite() const {
  for (int l = 0; l < num_layers(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

GradientBundle Mlp::zero_gradients() const {
  GradientBundle g;
  for (int l = 0; l < num_layers(); ++l) {
    g.weights.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Vector::Zero(biases_[l].size()));
  }
  g.input = Matrix::Zero(input_size(), 1);
  return g;
}

Adam::Adam(const Mlp& net, AdamConfig config) : config_(config) {
  for (int l = 0; l < net.num_layers(); ++l) {
    m_w_.push_back(Matrix::Zero(net.weight(l).rows(), net.weight(l).cols()));
    v_w_.push_back(m_w_.back());
    m_b_.push_back(Vector::Zero(net.bias(l).size()));
    v_b_.push_back(m_b_.back());
  }
}

void Adam::step(Mlp& net, const GradientBundle& grads) {
  if (static_cast<int>(grads.weights.size()) != net.num_layers() ||
      m_w_.size() != grads.weights.size()) {
    throw DimensionError("Adam::step: gradient/optimizer shape mismatch");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    if (grads.weights[l].rows() != net.weight(l).rows() ||
        grads.weights[l].cols() != net.weight(l).cols() ||
        grads.biases[l].size() != net.bias(l).size()) {
      throw DimensionError("Adam::step: gradient shape mismatch");
    }
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
      throw NumericError("Adam::step: non-finite gradient in layer " +
                         std::to_string(l));
    }
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    update(net.weight(l), m_w_[l], v_w_[l], grads.weights[l]);
    update(net.bias(l), m_b_[l], v_b_[l], grads.biases[l]);
  }
  if (!net.all_finite()) {
    throw NumericError("Adam::step: parameters became non-finite");
  }
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.same_architecture(source)) {
    throw DimensionError("soft_update: architecture mismatch");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  }
  for (int l = 0; l < target.num_layers(); ++l) {
    target.weight(l) = tau * source.weight(l) + (1.0 - tau) * target.weight(l);
    target.bias(l) = tau * source.bias(l) + (1.0 - tau) * target.bias(l);
  }
}

void write_snapshot(std::ostream& out, const Mlp& net) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
  for (int s : net.layer_sizes()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(net.hidden_activation()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(net.output_activation()));
  put_le<std::uint8_t>(out, net.has_output_bounds() ? 1 : 0);
  for (int l = 0; l < net.num_layers(); ++l) {
    const Matrix& w = net.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) put_le<double>(out, w(i, j));
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i)
      put_le<double>(out, net.bias(l)(i));
  }
  if (net.has_output_bounds()) {
    for (Eigen::Index i = 0; i < net.output_size(); ++i)
      put_le<double>(out, net.output_center()(i));
    for (Eigen::Index i = 0; i < net.output_size(); ++i)
      put_le<double>(out, net.output_half_width()(i));
  }
  if (!out) throw std::runtime_error("snapshot: write failed");
}

Mlp read_snapshot(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("snapshot: bad magic");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    throw std::runtime_error("snapshot: unsupported version " +
                             std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(in);
  if (count < 2 || count > 64) throw std::runtime_error("snapshot: bad layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i)
    sizes.push_back(static_cast<int>(get_le<std::uint32_t>(in)));
  const auto hidden = static_cast<Activation>(get_le<std::uint8_t>(in));
  const auto output = static_cast<Activation>(get_le<std::uint8_t>(in));
  const bool bounded = get_le<std::uint8_t>(in) != 0;
  Mlp net(sizes, hidden, output);
  for (int l = 0; l < net.num_layers(); ++l) {
    Matrix& w = net.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get_le<double>(in);
    for (Eigen::Index i = 0; i < net.bias(l).size(); ++i)
      net.bias(l)(i) = get_le<double>(in);
  }
  if (bounded) {
    Vector center(net.output_size()), half(net.output_size());
    for (Eigen::Index i = 0; i < center.size(); ++i) center(i) = get_le<double>(in);
    for (Eigen::Index i = 0; i < half.size(); ++i) half(i) = get_le<double>(in);
    net.set_output_bounds(center - half, center + half);
  }
  return net;
}

void save_snapshot(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
  write_snapshot(out, net);
}

Mlp load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

std::uint64_t parameter_hash(const Mlp& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : net.flat_parameters()) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace wolp::nn
