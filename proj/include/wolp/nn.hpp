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

#ifndef WOLP_NN_HPP_
#define WOLP_NN_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "wolp/types.hpp"

namespace wolp::nn {

enum class Activation : std::uint8_t { kIdentity = 0, kRelu = 1, kTanh = 2 };

// Gradients of a scalar objective with respect to every parameter of an Mlp,
// plus the gradient with respect to the network input (one column per
// sample for batched backward passes).
struct GradientBundle {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  Matrix input;

  double squared_norm() const;
  bool all_finite() const;
};

// Fully connected feed-forward network. Layer i maps layer_sizes[i] inputs to
// layer_sizes[i+1] outputs. Hidden layers share one activation; the output
// layer has its own. A kTanh output can be rescaled into a box
// [low, high] via set_output_bounds, giving center + half_width * tanh(z).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, Activation hidden,
      Activation output = Activation::kIdentity);

  // Uniform in +-1/sqrt(fan_in) for weights and biases.
  static Mlp random(std::vector<int> layer_sizes, Activation hidden,
                    Activation output, Rng& rng);

  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }

  Matrix& weight(int layer) { return weights_[layer]; }
  const Matrix& weight(int layer) const { return weights_[layer]; }
  Vector& bias(int layer) { return biases_[layer]; }
  const Vector& bias(int layer) const { return biases_[layer]; }

  void set_output_bounds(const Vector& low, const Vector& high);
  bool has_output_bounds() const { return out_half_.size() > 0; }
  const Vector& output_center() const { return out_center_; }
  const Vector& output_half_width() const { return out_half_; }

  Vector forward(const Vector& input) const;
  // One sample per column.
  Matrix forward_batch(const Matrix& inputs) const;

  // Exact gradients of sum_j output_j * output_grad_j.
  GradientBundle backward(const Vector& input, const Vector& output_grad) const;
  // Parameter gradients are summed over the batch columns; input gradients
  // are returned per column.
  GradientBundle backward_batch(const Matrix& inputs,
                                const Matrix& output_grads) const;

  std::size_t parameter_count() const;
  // Layer order, weights (column-major) before biases.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& params);

  bool same_architecture(const Mlp& other) const;
  bool all_finite() const;

  GradientBundle zero_gradients() const;

 private:
  // Pre-activations and activations per layer for one batch.
  struct Tape {
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
  };
  Matrix run(const Matrix& inputs, Tape* tape) const;

  std::vector<int> layer_sizes_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  Vector out_center_;
  Vector out_half_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moment state for one network. step() minimizes: parameters move
// against the supplied gradient.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig config);

  void step(Mlp& net, const GradientBundle& grads);

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

// target <- tau * source + (1 - tau) * target, parameter-wise.
void soft_update(Mlp& target, const Mlp& source, double tau);

// Binary snapshot: "WOLP", u32 version, u32 layer count, u32 sizes, u8 hidden
// and output activations, then little-endian f64 parameters in layer order,
// weights (row-major) before biases; bounded outputs append center and
// half-width.
void write_snapshot(std::ostream& out, const Mlp& net);
Mlp read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const Mlp& net);
Mlp load_snapshot(const std::filesystem::path& path);

// FNV-1a over the raw parameter bytes.
std::uint64_t parameter_hash(const Mlp& net);

}  // namespace wolp::nn

#endif  // WOLP_NN_HPP_
