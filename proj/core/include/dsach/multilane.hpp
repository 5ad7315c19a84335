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
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "dsach/env.hpp"
#include "dsach/geometry.hpp"

namespace dsach::env {

/// Reward weights and cost constants (defaults are the reference values).
struct RewardCostParams {
  // action increments per step and state bounds
  double d_ax_max = 0.25;
  double d_delta_max = 0.0065;
  double ax_min = -1.5;
  double ax_max = 0.8;
  double delta_max = 0.065;
  // reward weights
  double rho_y = 2.5;
  double rho_v = 0.4;
  double rho_phi = 0.3;
  double rho_r = 0.3;
  double rho_acc = 0.2;
  double rho_delta = 0.15;
  double r_live = 12.0;
  double huber_delta = 1.0;
  // cost constants
  int max_surrounding = 8;
  double dt_ft = 0.5;
  double rho_ft = 5.0;
  double rho_fs = 5.0;
  double rho_ss = 1.0;
  double rho_b = 1.0;
  double d_front = 50.0;
  double d_side = 1.8;
  double d_st = 12.0;
  double d_ss = 2.0;
  double d_b = 1.8;
  double space_region_scale = 2.0;
  double collision_penalty = 100.0;
  double out_of_area_penalty = 400.0;
  double min_speed_for_gap = 0.1;
};

/// Scenario configuration, loadable from a JSON file.
struct MultilaneConfig {
  int lanes_per_direction = 3;
  double lane_width = 3.75;
  /// Length of road populated with traffic ahead of the ego spawn point [m].
  double road_length = 600.0;
  /// Distance from spawn to route end; reaching it counts as arrival [m].
  double route_length = 300.0;
  /// Traffic flow per lane [veh/h], sampled uniformly per episode.
  double flow_min = 600.0;
  double flow_max = 1200.0;
  double angle_min_deg = 60.0;
  double angle_max_deg = 120.0;
  int horizon = 1500;
  double dt = 0.1;
  double desired_speed_min = 4.0;
  double desired_speed_max = 12.0;
  /// Cruise speed of each traffic lane, sampled per lane per episode [m/s].
  double traffic_speed_min = 6.0;
  double traffic_speed_max = 10.0;
  bool oncoming_traffic = true;
  double sensing_range = 80.0;
  double wheelbase = 2.7;
  double ego_length = 4.8;
  double ego_width = 2.0;
  double braking_threshold = 1.0;
  int spawn_retries = 20;
  RewardCostParams rc;

  void validate() const;
};

nlohmann::json to_json(const MultilaneConfig& c);
/// Unknown keys raise ConfigError.
MultilaneConfig multilane_config_from_json(const nlohmann::json& j);

struct EgoState {
  double x = 0.0;
  double y = 0.0;
  double phi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double r = 0.0;
  double delta = 0.0;
  double ax = 0.0;
  double delta_prev = 0.0;
  double ax_prev = 0.0;
};

/// Traffic participant in road coordinates (s along the road, l to the left
/// of the center line). Oncoming vehicles drive toward -s.
struct Vehicle {
  int lane = 0;  // 0..lanes-1 same direction as ego, negative = oncoming
  double s = 0.0;
  double l = 0.0;
  double speed = 0.0;
  double desired_speed = 0.0;
  double length = 4.5;
  double width = 1.8;
};

/// Surrounding-vehicle slot in the ego frame.
struct SurVehicle {
  double x = 0.0;
  double y = 0.0;
  double cos_phi = 0.0;
  double sin_phi = 0.0;
  double v = 0.0;
  double length = 0.0;
  double width = 0.0;
  double mask = 0.0;
};

struct RefTrajectory {
  int lane = 0;
  double desired_speed = 0.0;
  /// Horizons {0, 0.1, 0.5, 1.0} s, each (x, y, cos phi, sin phi, v) in the ego frame.
  std::array<std::array<double, 5>, 4> points{};
};

struct SimState {
  EgoState ego;
  std::vector<Vehicle> vehicles;
  /// Road frame: origin and heading of the center line (s axis).
  geom::StraightLine road;
  int ref_lane = 0;
  double desired_speed = 8.0;
  double s_start = 0.0;
  int step = 0;
};

struct RewardBreakdown {
  double tracking = 0.0;
  double action = 0.0;
  double comfort = 0.0;
  double live = 0.0;
  double total() const { return tracking + action + comfort + live; }
};

struct CostBreakdown {
  double front = 0.0;
  double space = 0.0;
  double boundary = 0.0;
  double terminal = 0.0;
  double total() const { return front + space + boundary + terminal; }
};

/// Observation layout: [o_b(2), o_ego(7), o_ref(20), o_sur(8 x 8)] = 93.
inline constexpr std::size_t kObsBoundary = 2;
inline constexpr std::size_t kObsEgo = 7;
inline constexpr std::size_t kObsRef = 20;
inline constexpr std::size_t kObsSurPerVehicle = 8;

class MultilaneEnv final : public Environment {
 public:
  explicit MultilaneEnv(MultilaneConfig config = {});

  std::string id() const override { return "multilane"; }
  std::size_t obs_dim() const override;
  std::size_t act_dim() const override { return 2; }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(std::span<const double> action) override;
  std::vector<double> obs_scale() const override;
  TrajectoryRow trajectory_row() const override { return last_row_; }

  const MultilaneConfig& config() const { return config_; }
  const SimState& state() const { return state_; }
  /// Replaces the simulator state (used for constructed test scenarios).
  void set_state(SimState s);

  // Lane geometry in road coordinates.
  double lane_center(int lane) const;
  /// Lane whose center is closest to the ego.
  int ego_lane() const;
  double ego_s() const;
  double ego_l() const;
  /// Distances from the ego center to the left/right edges of the drivable area.
  std::pair<double, double> boundary_distances() const;

  std::vector<double> observe() const override;
  std::vector<SurVehicle> surrounding() const;
  RefTrajectory reference() const;
  RewardBreakdown reward(std::span<const double> increments) const;
  CostBreakdown cost(bool collided, bool out_of_area) const;
  bool check_collision() const;

  geom::Box ego_box() const;
  geom::Box vehicle_box(const Vehicle& v) const;

  /// Populates traffic for one direction-lane at the given flow and speed.
  static std::vector<Vehicle> spawn_lane(int lane, double l_center, double s_begin, double s_end,
                                         double flow_veh_per_h, double speed, Rng& rng);

 private:
  void advance_traffic();
  TrajectoryRow make_row(double reward, double cost, EventType e) const;

  MultilaneConfig config_;
  SimState state_;
  TrajectoryRow last_row_;
};

/// Scores each candidate reference lane (current, left, right) with `score`
/// applied to the observation built with that lane as the reference, and
/// returns the argmax. Ties keep the ego's current lane.
int select_reference(const MultilaneEnv& env,
                     const std::function<double(std::span<const double> obs)>& score);

}  // namespace dsach::env
