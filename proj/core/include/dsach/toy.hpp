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

#include <array>
#include <nlohmann/json.hpp>
#include <vector>

#include "dsach/env.hpp"

namespace dsach::env {

/// Reach-avoid task on [-1, 1]^2: drive from the start to the goal disc while
/// staying out of the hazard disc.
struct ToyConfig {
  std::array<double, 2> start{-0.6, 0.0};
  double start_jitter = 0.02;
  std::array<double, 2> goal{0.6, 0.0};
  double goal_radius = 0.05;
  std::array<double, 2> hazard_center{0.0, -0.02};
  double hazard_radius = 0.3;
  double step_size = 0.05;
  double goal_bonus = 10.0;
  int horizon = 200;

  void validate() const;
};

nlohmann::json to_json(const ToyConfig& c);
/// Unknown keys raise ConfigError.
ToyConfig toy_config_from_json(const nlohmann::json& j);

class ToyEnv final : public Environment {
 public:
  explicit ToyEnv(ToyConfig config = {});

  std::string id() const override { return "toy"; }
  std::size_t obs_dim() const override { return 6; }
  std::size_t act_dim() const override { return 2; }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;
  std::vector<double> obs_scale() const override { return std::vector<double>(6, 1.0); }
  TrajectoryRow trajectory_row() const override { return row_; }

  /// Starts an episode at an exact position (no jitter).
  std::vector<double> reset_to(std::array<double, 2> pos);

  const ToyConfig& config() const { return config_; }
  std::array<double, 2> position() const { return pos_; }
  int steps() const { return steps_; }
  bool in_hazard(std::array<double, 2> p) const;
  bool at_goal(std::array<double, 2> p) const;
  std::vector<double> observe() const override;

 private:
  ToyConfig config_;
  std::array<double, 2> pos_{};
  int steps_ = 0;
  TrajectoryRow row_;
};

/// Value tables on a grid_n x grid_n lattice over [-1, 1]^2 (index i + grid_n * j
/// for x_i, y_j). Actions are the 9 moves with components in {-1, 0, 1};
/// successors snap to the nearest lattice point, which is exact when the
/// lattice spacing equals the step size.
struct DpResult {
  int grid_n = 0;
  double gamma = 0.0;
  std::vector<double> v_r_unconstrained;
  std::vector<double> v_r;  // constrained (hazard-masked) policy
  std::vector<double> v_c;  // cost value of the constrained policy
  std::vector<int> policy;  // action index in [0, 9)
  int sweeps = 0;
  double residual = 0.0;

  double coord(int i) const { return -1.0 + 2.0 * i / (grid_n - 1); }
  int nearest(double x) const;
  int cell(std::array<double, 2> p) const { return nearest(p[0]) + grid_n * nearest(p[1]); }
};

/// Action index k encodes (dx, dy) = (k % 3 - 1, k / 3 - 1).
std::array<double, 2> dp_action(int k);

/// Value iteration to a 1e-8 sup-norm residual. Moves into the hazard are
/// masked for the constrained policy unless every move is. Requires
/// grid_n >= 21 and gamma in [0, 1).
DpResult dp_oracle(const ToyConfig& config, int grid_n, double gamma);

struct RolloutSummary {
  double ret = 0.0;
  double cost = 0.0;
  int length = 0;
  bool arrived = false;
};

/// Runs the DP policy in the continuous environment from the nominal start.
RolloutSummary dp_rollout(const ToyConfig& config, const DpResult& dp);

}  // namespace dsach::env
