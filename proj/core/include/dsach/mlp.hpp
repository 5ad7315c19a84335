// Copyright 2026 The dsach Authors
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

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dsach/param_vector.hpp"
#include "dsach/rng.hpp"

namespace dsach::nn {

/// Column-major batch: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kIdentity, kTanh, kRelu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Shape of a fully connected network. `activations` holds one entry per
/// layer (hidden layers first, output layer last).
struct MlpSpec {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 0;
  std::vector<Activation> activations;

  /// Hidden layers use `hidden_act`, the output layer is linear.
  static MlpSpec make(std::size_t input, std::vector<std::size_t> hidden, std::size_t output,
                      Activation hidden_act = Activation::kTanh);

  std::size_t num_layers() const { return hidden.size() + 1; }
  std::size_t layer_in(std::size_t l) const;
  std::size_t layer_out(std::size_t l) const;
  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Cached per-layer values from a forward pass, consumed by backward().
struct Tape {
  std::vector<Matrix> inputs;  // input to layer l (inputs[0] is the network input)
  std::vector<Matrix> pre;     // pre-activation of layer l
  Matrix output;
};

class Mlp {
 public:
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  const LayoutPtr& layout() const { return layout_; }
  std::size_t num_params() const { return layout_->total_size(); }

  /// Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
  /// weights and biases.
  ParamVector init(Rng& rng) const;
  ParamVector zeros() const;

  Matrix forward(const ParamVector& params, const Matrix& input) const;
  Matrix forward(const ParamVector& params, const Matrix& input, Tape& tape) const;

  /// Reverse pass for dL/d(output) = d_out. Adds parameter gradients into
  /// `grad` when non-null and returns dL/d(input).
  Matrix backward(const ParamVector& params, const Tape& tape, const Matrix& d_out,
                  GradientVector* grad) const;

 private:
  void check_params(const ParamVector& params) const;

  MlpSpec spec_;
  LayoutPtr layout_;
};

/// Single-sample convenience wrapper.
std::vector<double> mlp_forward(const ParamVector& params, const MlpSpec& spec,
                                std::span<const double> input);

}  // namespace dsach::nn
