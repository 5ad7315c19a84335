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
#include <span>

#include "dsach/param_vector.hpp"

/// Harmonic gradient computation.
///
/// Given a reward gradient g_r and a cost gradient g_c (both descent
/// directions of their objectives) the harmonic gradient h solves
///
///     max_h  min_{i in {r, c}} <g_i, h>    s.t.  ||h - g_hat|| <= rho * ||g_hat||,
///
/// with the nominal gradient g_hat = g_r + lambda * g_c as the ball center.
/// Writing g_w = w g_r + (1 - w) g_c, the problem has the dual
///
///     min_{w in [0, 1]}  phi(w) = <g_w, g_hat> + rho ||g_hat|| ||g_w||,
///
/// whose minimizer w* gives h = g_hat + rho ||g_hat|| g_w* / ||g_w*||.
namespace dsach::hpi {

using nn::GradientVector;

struct HpiProblem {
  GradientVector g_r;
  GradientVector g_c;
  double lambda = 1.0;
  double rho = 0.9;
  int max_iter = 20;

  /// Throws ConfigError on length mismatch or out-of-range constants and
  /// NumericalError on non-finite gradients.
  void validate() const;
};

struct HarmonicSolution {
  GradientVector h;
  /// Dual weight on g_r at the optimum.
  double w_star = 0.0;
  double inner_r = 0.0;
  double inner_c = 0.0;
  /// min(<g_r, h>, <g_c, h>).
  double worst_inner = 0.0;
  /// rho ||g_hat|| - ||h - g_hat||; nonnegative up to rounding.
  double feasibility_slack = 0.0;
  double radius = 0.0;
  int iterations_used = 0;
  /// Set when g_hat = 0; h is then zero and callers skip the update.
  bool degenerate = false;
};

GradientVector nominal_gradient(std::span<const double> g_r, std::span<const double> g_c,
                                double lambda);

struct ConflictReport {
  double inner = 0.0;
  bool conflict = false;
};

ConflictReport detect_conflict(std::span<const double> g_r, std::span<const double> g_c);

/// Alternates between identifying the worst-case objective at the current h
/// and maximizing the correspondingly weighted inner product over the trust
/// region, moving the dual weight with a safeguarded Newton step on the
/// equalization condition <g_r - g_c, h(w)> = 0.
HarmonicSolution solve_harmonic(const HpiProblem& problem);

struct DualOracleResult {
  GradientVector h;
  double w_star = 0.0;
  double dual_value = 0.0;
};

/// Dense-grid minimization of phi over w in [0, 1] (grid_points >= 2).
/// Ties resolve to the smallest w.
DualOracleResult dual_oracle_solve(const HpiProblem& problem, std::size_t grid_points);

GradientVector dual_oracle(const HpiProblem& problem, std::size_t grid_points);

}  // namespace dsach::hpi
