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

#include <cstddef>
#include <cstdint>
#include <functional>

#include "dsach/param_vector.hpp"

namespace dsach::nn {

/// Scalar function of the parameters. Returns the value; when `grad` is
/// non-null it must also write the exact gradient into it (zeroed by the
/// caller).
using ScalarObjective = std::function<double(const ParamVector&, GradientVector*)>;

/// Evaluates the reverse-mode gradient of `loss` at `params`.
GradientVector grad_scalar(const ScalarObjective& loss, const ParamVector& params);

struct FiniteDiffOptions {
  double epsilon = 1e-5;
  /// 0 checks every coordinate, otherwise a seeded random subset of this size.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
  /// Derivatives smaller than this are compared absolutely against it.
  double abs_floor = 1e-6;
};

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Central-difference audit of grad_scalar. The relative error of coordinate i
/// is |analytic - numeric| / max(|numeric|, abs_floor).
FiniteDiffReport finite_diff_check(const ScalarObjective& loss, const ParamVector& params,
                                   const FiniteDiffOptions& options = {});

}  // namespace dsach::nn
