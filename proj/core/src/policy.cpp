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

#include "dsach/policy.hpp"

#include <cmath>
#include <numbers>

#include "dsach/errors.hpp"

namespace dsach::agent {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

PolicyHead split_head(const Matrix& net_out) {
  if (net_out.rows() % 2 != 0) throw ConfigError("policy head: output rows must be even");
  const auto d = net_out.rows() / 2;
  PolicyHead h;
  h.mean = net_out.topRows(d);
  h.log_std_raw = net_out.bottomRows(d);
  h.log_std = h.log_std_raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  if (!h.mean.allFinite() || !h.log_std_raw.allFinite()) {
    throw NumericalError("policy head: non-finite network output");
  }
  return h;
}

double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

SquashedSample squash_sample(const PolicyHead& head, const Matrix& eps) {
  if (eps.rows() != head.mean.rows() || eps.cols() != head.mean.cols()) {
    throw ConfigError("squash_sample: noise shape mismatch");
  }
  SquashedSample s;
  s.pre = head.mean.array() + head.log_std.array().exp() * eps.array();
  s.action = s.pre.array().tanh();
  s.log_prob = Vector::Zero(eps.cols());
  for (Eigen::Index j = 0; j < eps.cols(); ++j) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < eps.rows(); ++i) {
      const double e = eps(i, j);
      lp += -0.5 * e * e - head.log_std(i, j) - kHalfLog2Pi - log_one_minus_tanh_sq(s.pre(i, j));
    }
    s.log_prob(j) = lp;
  }
  return s;
}

double squashed_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action) {
  if (mean.size() != log_std.size() || mean.size() != action.size()) {
    throw ConfigError("squashed_log_prob: length mismatch");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!(action[i] > -1.0 && action[i] < 1.0)) return -std::numeric_limits<double>::infinity();
    const double ls = std::clamp(log_std[i], kLogStdMin, kLogStdMax);
    const double u = std::atanh(action[i]);
    const double z = (u - mean[i]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi - log_one_minus_tanh_sq(u);
  }
  return lp;
}

Matrix squash_backward(const PolicyHead& head, const Matrix& eps, const SquashedSample& s,
                       const Matrix& d_action, const Vector& d_log_prob) {
  const auto d = head.mean.rows();
  const auto n = head.mean.cols();
  Matrix out = Matrix::Zero(2 * d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double g_lp = d_log_prob.size() ? d_log_prob(j) : 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double a = s.action(i, j);
      const double g_a = d_action.size() ? d_action(i, j) : 0.0;
      // d log_prob / du = 2 tanh(u); d log_prob / d log_std (direct) = -1.
      const double g_u = g_a * (1.0 - a * a) + g_lp * 2.0 * a;
      out(i, j) = g_u;
      const double raw = head.log_std_raw(i, j);
      if (raw > kLogStdMin && raw < kLogStdMax) {
        out(d + i, j) = g_u * std::exp(head.log_std(i, j)) * eps(i, j) - g_lp;
      }
    }
  }
  return out;
}

}  // namespace dsach::agent
