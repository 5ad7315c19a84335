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

#include <cstdint>
#include <vector>

#include "dsach/param_vector.hpp"

namespace dsach::nn {

/// Moment estimates for the bias-corrected adaptive-moment optimizer.
struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerState for_params(std::size_t n);
};

/// One Adam update: params -= lr * m_hat / (sqrt(v_hat) + eps).
/// Throws NumericalError on a non-finite gradient and ConfigError on length
/// mismatch or lr <= 0.
void adam_step(ParamVector& params, const GradientVector& grad, OptimizerState& state, double lr);

/// Scalar variant used for the temperature parameter.
struct ScalarAdam {
  double m = 0.0;
  double v = 0.0;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  double step_value(double value, double grad, double lr);
};

}  // namespace dsach::nn
