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

#include "dsach/mlp.hpp"

#include <cmath>

#include "dsach/errors.hpp"

namespace dsach::nn {
namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kTanh: {
      // tanh|x| = (1 - e^{-2|x|}) / (1 + e^{-2|x|}); Eigen vectorizes exp but
      // not tanh for doubles.
      const Eigen::ArrayXXd e = (-2.0 * m.array().abs()).exp();
      m = ((1.0 - e) / (1.0 + e) * m.array().sign()).matrix();
      break;
    }
    case Activation::kRelu:
      m = m.cwiseMax(0.0);
      break;
  }
}

// Multiplies `delta` in place by the activation derivative, given the
// pre-activation `pre` and the activation output `out`.
void apply_activation_grad(Activation act, const Matrix& pre, const Matrix& out, Matrix& delta) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kTanh:
      delta.array() *= 1.0 - out.array().square();
      break;
    case Activation::kRelu:
      delta.array() *= (pre.array() > 0.0).cast<double>();
      break;
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + s + "'");
}

MlpSpec MlpSpec::make(std::size_t input, std::vector<std::size_t> hidden, std::size_t output,
                      Activation hidden_act) {
  MlpSpec s;
  s.input = input;
  s.hidden = std::move(hidden);
  s.output = output;
  s.activations.assign(s.hidden.size(), hidden_act);
  s.activations.push_back(Activation::kIdentity);
  return s;
}

std::size_t MlpSpec::layer_in(std::size_t l) const { return l == 0 ? input : hidden[l - 1]; }

std::size_t MlpSpec::layer_out(std::size_t l) const {
  return l == hidden.size() ? output : hidden[l];
}

void MlpSpec::validate() const {
  if (input == 0 || output == 0) throw ConfigError("mlp: input and output widths must be positive");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("mlp: hidden widths must be positive");
  }
  if (activations.size() != num_layers()) {
    throw ConfigError("mlp: expected " + std::to_string(num_layers()) + " activations, got " +
                      std::to_string(activations.size()));
  }
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::vector<ParamBlock> blocks;
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    blocks.push_back({"l" + std::to_string(l) + ".weight", spec_.layer_out(l), spec_.layer_in(l), 0});
    blocks.push_back({"l" + std::to_string(l) + ".bias", spec_.layer_out(l), 1, 0});
  }
  layout_ = std::make_shared<const ParamLayout>(std::move(blocks));
}

ParamVector Mlp::init(Rng& rng) const {
  ParamVector p(layout_);
  for (std::size_t l = 0; l < spec_.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec_.layer_in(l)));
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& b = layout_->blocks()[2 * l + k];
      for (std::size_t i = 0; i < b.size(); ++i) p[b.offset + i] = rng.uniform(-bound, bound);
    }
  }
  return p;
}

ParamVector Mlp::zeros() const { return ParamVector(layout_); }

void Mlp::check_params(const ParamVector& params) const {
  if (params.size() != layout_->total_size()) {
    throw ConfigError("mlp: parameter vector has " + std::to_string(params.size()) +
                      " entries, network needs " + std::to_string(layout_->total_size()));
  }
}

Matrix Mlp::forward(const ParamVector& params, const Matrix& input) const {
  Tape tape;
  return forward(params, input, tape);
}

Matrix Mlp::forward(const ParamVector& params, const Matrix& input, Tape& tape) const {
  check_params(params);
  if (static_cast<std::size_t>(input.rows()) != spec_.input) {
    throw ConfigError("mlp: input has " + std::to_string(input.rows()) + " rows, expected " +
                      std::to_string(spec_.input));
  }
  const auto& blocks = layout_->blocks();
  const std::size_t layers = spec_.num_layers();
  tape.inputs.resize(layers);
  tape.pre.resize(layers);
  Matrix a = input;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto& wb = blocks[2 * l];
    const auto& bb = blocks[2 * l + 1];
    ConstMap w(params.data() + wb.offset, static_cast<Eigen::Index>(wb.rows),
               static_cast<Eigen::Index>(wb.cols));
    Eigen::Map<const Vector> bias(params.data() + bb.offset, static_cast<Eigen::Index>(bb.rows));
    Matrix z = w * a;
    z.colwise() += bias;
    if (!z.allFinite()) {
      throw NumericalError("mlp forward: non-finite pre-activation in layer " + std::to_string(l));
    }
    tape.inputs[l] = std::move(a);
    tape.pre[l] = z;
    apply_activation(spec_.activations[l], z);
    a = std::move(z);
  }
  tape.output = a;
  return a;
}

Matrix Mlp::backward(const ParamVector& params, const Tape& tape, const Matrix& d_out,
                     GradientVector* grad) const {
  check_params(params);
  const std::size_t layers = spec_.num_layers();
  if (tape.pre.size() != layers) throw ConfigError("mlp backward: tape does not match network");
  if (d_out.rows() != static_cast<Eigen::Index>(spec_.output) ||
      d_out.cols() != tape.output.cols()) {
    throw ConfigError("mlp backward: output gradient has wrong shape");
  }
  if (grad != nullptr && grad->size() != params.size()) {
    throw ConfigError("mlp backward: gradient vector has wrong length");
  }
  const auto& blocks = layout_->blocks();
  Matrix delta = d_out;
  for (std::size_t step = 0; step < layers; ++step) {
    const std::size_t l = layers - 1 - step;
    const Matrix& out = l + 1 < layers ? tape.inputs[l + 1] : tape.output;
    apply_activation_grad(spec_.activations[l], tape.pre[l], out, delta);
    if (!delta.allFinite()) {
      throw NumericalError("mlp backward: non-finite gradient in layer " + std::to_string(l));
    }
    const auto& wb = blocks[2 * l];
    const auto& bb = blocks[2 * l + 1];
    ConstMap w(params.data() + wb.offset, static_cast<Eigen::Index>(wb.rows),
               static_cast<Eigen::Index>(wb.cols));
    if (grad != nullptr) {
      MutMap gw(grad->data() + wb.offset, static_cast<Eigen::Index>(wb.rows),
                static_cast<Eigen::Index>(wb.cols));
      Eigen::Map<Vector> gb(grad->data() + bb.offset, static_cast<Eigen::Index>(bb.rows));
      gw.noalias() += delta * tape.inputs[l].transpose();
      gb.noalias() += delta.rowwise().sum();
    }
    delta = (w.transpose() * delta).eval();
  }
  return delta;
}

std::vector<double> mlp_forward(const ParamVector& params, const MlpSpec& spec,
                                std::span<const double> input) {
  Mlp net(spec);
  if (input.size() != spec.input) {
    throw ConfigError("mlp_forward: input length " + std::to_string(input.size()) +
                      " does not match spec input width " + std::to_string(spec.input));
  }
  Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  Matrix y = net.forward(params, x);
  return {y.data(), y.data() + y.size()};
}

}  // namespace dsach::nn
