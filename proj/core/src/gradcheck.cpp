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

#include "dsach/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dsach/errors.hpp"
#include "dsach/rng.hpp"

namespace dsach::nn {

GradientVector grad_scalar(const ScalarObjective& loss, const ParamVector& params) {
  GradientVector g = GradientVector::zeros_like(params);
  const double value = loss(params, &g);
  if (!std::isfinite(value)) throw NumericalError("grad_scalar: loss is not finite");
  g.require_finite("grad_scalar");
  return g;
}

FiniteDiffReport finite_diff_check(const ScalarObjective& loss, const ParamVector& params,
                                   const FiniteDiffOptions& options) {
  if (!(options.epsilon > 0.0)) throw ConfigError("finite_diff_check: epsilon must be positive");
  const GradientVector analytic = grad_scalar(loss, params);

  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    Rng rng(options.seed);
    for (std::size_t i = 0; i < options.max_coords; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.index(coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(options.max_coords);
  }

  FiniteDiffReport report;
  ParamVector probe = params;
  for (std::size_t i : coords) {
    const double orig = probe[i];
    probe[i] = orig + options.epsilon;
    const double up = loss(probe, nullptr);
    probe[i] = orig - options.epsilon;
    const double down = loss(probe, nullptr);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(std::abs(numeric), options.abs_floor);
    ++report.checked;
    if (err > report.max_rel_error || report.checked == 1) {
      report.max_rel_error = err;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  return report;
}

}  // namespace dsach::nn
