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

#include "dsach/adam.hpp"

#include <cmath>
#include <string>

#include "dsach/errors.hpp"

namespace dsach::nn {

OptimizerState OptimizerState::for_params(std::size_t n) {
  OptimizerState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(ParamVector& params, const GradientVector& grad, OptimizerState& state, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  const std::size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n) {
    throw ConfigError("adam: parameter, gradient and moment lengths disagree (" +
                      std::to_string(n) + ", " + std::to_string(grad.size()) + ", " +
                      std::to_string(state.m.size()) + ")");
  }
  grad.require_finite("adam");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

double ScalarAdam::step_value(double value, double grad, double lr) {
  if (!std::isfinite(grad)) throw NumericalError("adam: non-finite scalar gradient");
  step += 1;
  const double t = static_cast<double>(step);
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(beta1, t));
  const double v_hat = v / (1.0 - std::pow(beta2, t));
  return value - lr * m_hat / (std::sqrt(v_hat) + eps);
}

}  // namespace dsach::nn
