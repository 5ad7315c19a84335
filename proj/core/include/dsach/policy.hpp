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

#include <span>
#include <vector>

#include "dsach/mlp.hpp"

namespace dsach::agent {

using nn::Matrix;
using nn::Vector;

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Pre-squash Gaussian parameters for a batch (one column per sample).
struct PolicyHead {
  Matrix mean;
  Matrix log_std;      // clamped to [kLogStdMin, kLogStdMax]
  Matrix log_std_raw;  // network output before clamping
};

/// Splits the actor network output (2 * act_dim rows) into mean and log-std.
PolicyHead split_head(const Matrix& net_out);

/// Reparameterized sample a = tanh(mean + std * eps) with its log-density.
struct SquashedSample {
  Matrix pre;     // u = mean + std * eps
  Matrix action;  // tanh(u)
  Vector log_prob;
};

SquashedSample squash_sample(const PolicyHead& head, const Matrix& eps);

/// log(1 - tanh(u)^2) evaluated without cancellation.
double log_one_minus_tanh_sq(double u);

/// Log-density of an action in (-1, 1)^d under the squashed Gaussian.
double squashed_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action);

/// Backpropagates dL/d(action) and dL/d(log_prob) through the reparameterized
/// sample to dL/d(net_out). Either input may be empty (treated as zero).
Matrix squash_backward(const PolicyHead& head, const Matrix& eps, const SquashedSample& s,
                       const Matrix& d_action, const Vector& d_log_prob);

}  // namespace dsach::agent
