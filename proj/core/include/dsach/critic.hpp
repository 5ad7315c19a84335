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

#include "dsach/mlp.hpp"

namespace dsach::agent {

using nn::Matrix;
using nn::Vector;

inline constexpr double kStdFloor = 1e-3;

/// Gaussian return distribution.
struct ReturnDistribution {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Critic network output (2 rows: mean, raw std) mapped to distributions.
/// stddev = softplus(raw) + kStdFloor.
struct CriticHead {
  Vector mean;
  Vector stddev;
  Vector raw;
};

CriticHead critic_head(const Matrix& net_out);

/// Maps dL/d(mean), dL/d(stddev) back to dL/d(net_out).
Matrix critic_head_backward(const CriticHead& head, const Vector& d_mean, const Vector& d_std);

struct CriticLoss {
  double loss = 0.0;
  double d_mean = 0.0;
  double d_std = 0.0;
  bool clipped = false;
};

/// Gaussian negative log-likelihood of `target` under `predicted`. The mean
/// gradient uses the raw target; the stddev gradient uses the target clipped
/// to mean +- clip_bound * stddev, which bounds the variance update for
/// outlying samples. Without clipping the result is the exact NLL gradient.
CriticLoss critic_loss(const ReturnDistribution& predicted, double target, double clip_bound);

}  // namespace dsach::agent
