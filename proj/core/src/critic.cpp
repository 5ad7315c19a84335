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

#include "dsach/critic.hpp"

#include <algorithm>
#include <cmath>

#include "dsach/errors.hpp"

namespace dsach::agent {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

CriticHead critic_head(const Matrix& net_out) {
  if (net_out.rows() != 2) throw ConfigError("critic head: expected 2 output rows");
  if (!net_out.allFinite()) throw NumericalError("critic head: non-finite network output");
  CriticHead h;
  h.mean = net_out.row(0).transpose();
  h.raw = net_out.row(1).transpose();
  h.stddev = h.raw.unaryExpr([](double r) { return softplus(r) + kStdFloor; });
  return h;
}

Matrix critic_head_backward(const CriticHead& head, const Vector& d_mean, const Vector& d_std) {
  Matrix out(2, head.mean.size());
  out.row(0) = d_mean.transpose();
  for (Eigen::Index j = 0; j < head.raw.size(); ++j) out(1, j) = d_std(j) * sigmoid(head.raw(j));
  return out;
}

CriticLoss critic_loss(const ReturnDistribution& predicted, double target, double clip_bound) {
  const double mu = predicted.mean;
  const double sd = predicted.stddev;
  if (!(sd > 0.0) || !std::isfinite(mu) || !std::isfinite(target)) {
    throw NumericalError("critic_loss: invalid prediction or target");
  }
  if (!(clip_bound > 0.0)) throw ConfigError("critic_loss: clip_bound must be positive");
  CriticLoss out;
  const double diff = target - mu;
  const double var = sd * sd;
  out.loss = kHalfLog2Pi + std::log(sd) + 0.5 * diff * diff / var;
  out.d_mean = -diff / var;
  const double lo = mu - clip_bound * sd;
  const double hi = mu + clip_bound * sd;
  const double clipped = std::clamp(target, lo, hi);
  out.clipped = clipped != target;
  const double cdiff = clipped - mu;
  out.d_std = 1.0 / sd - cdiff * cdiff / (var * sd);
  return out;
}

}  // namespace dsach::agent
