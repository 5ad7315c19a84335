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
#include <string>
#include <vector>

#include "dsach/replay.hpp"
#include "dsach/rng.hpp"

namespace dsach::env {

using replay::EventType;

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  double cost = 0.0;
  /// True terminal state: value bootstrapping stops here.
  bool terminal = false;
  /// Episode ended without a terminal state (horizon or route end).
  bool truncated = false;
  /// Reached the goal / route end without collision or leaving the area.
  bool arrived = false;
  EventType event = EventType::kNormal;

  bool episode_over() const { return terminal || truncated; }
};

/// Column names shared by every trajectory log.
inline const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols{"step",  "x",     "y",       "phi",
                                             "v_x",   "a_x",   "delta",   "y_err",
                                             "phi_err", "reward", "cost", "event"};
  return cols;
}

struct TrajectoryRow {
  int step = 0;
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double v_x = 0.0;
  double a_x = 0.0;
  double delta = 0.0;
  double y_err = 0.0;
  double phi_err = 0.0;
  double reward = 0.0;
  double cost = 0.0;
  EventType event = EventType::kNormal;
};

/// Common surface of the simulators. Actions are normalized to [-1, 1] per
/// dimension; each environment rescales them internally.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t act_dim() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(std::span<const double> action) = 0;
  /// Observation of the current state.
  virtual std::vector<double> observe() const = 0;
  /// Per-component multipliers applied to observations before they reach a
  /// network.
  virtual std::vector<double> obs_scale() const = 0;
  /// Row describing the most recent step (or the reset state).
  virtual TrajectoryRow trajectory_row() const = 0;
};

}  // namespace dsach::env
