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

#include "dsach/multilane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsach/errors.hpp"

namespace dsach::env {
namespace {

constexpr std::array<double, 4> kRefHorizons{0.0, 0.1, 0.5, 1.0};
constexpr double kMinSpacing = 8.0;

// Intelligent driver model parameters for surrounding traffic.
constexpr double kIdmAccel = 1.5;
constexpr double kIdmDecel = 2.0;
constexpr double kIdmHeadway = 1.5;
constexpr double kIdmJam = 2.0;

double idm_accel(double v, double v0, double gap, double dv) {
  const double free = 1.0 - std::pow(v / std::max(v0, 0.1), 4);
  if (!std::isfinite(gap)) return kIdmAccel * free;
  const double s_star =
      kIdmJam + std::max(0.0, v * kIdmHeadway + v * dv / (2.0 * std::sqrt(kIdmAccel * kIdmDecel)));
  const double g = std::max(gap, 0.1);
  return kIdmAccel * (free - (s_star / g) * (s_star / g));
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

// --- configuration ----------------------------------------------------------

void MultilaneConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("multilane config: ") + what);
  };
  require(lanes_per_direction >= 1, "lanes_per_direction must be >= 1");
  require(lane_width > 0.0, "lane_width must be positive");
  require(road_length > 0.0 && route_length > 0.0, "road and route lengths must be positive");
  require(flow_min >= 0.0 && flow_max >= flow_min, "flow range must satisfy 0 <= min <= max");
  require(angle_min_deg <= angle_max_deg, "angle range is inverted");
  require(horizon >= 1, "horizon must be >= 1");
  require(dt > 0.0, "dt must be positive");
  require(desired_speed_min > 0.0 && desired_speed_max >= desired_speed_min,
          "desired speed range invalid");
  require(traffic_speed_min > 0.0 && traffic_speed_max >= traffic_speed_min,
          "traffic speed range invalid");
  require(wheelbase > 0.0 && ego_length > 0.0 && ego_width > 0.0, "ego dimensions must be positive");
  require(rc.max_surrounding >= 0, "max_surrounding must be >= 0");
  require(rc.ax_min < rc.ax_max && rc.delta_max > 0.0, "control bounds invalid");
}

nlohmann::json to_json(const MultilaneConfig& c) {
  const auto& r = c.rc;
  return {
      {"lanes_per_direction", c.lanes_per_direction},
      {"lane_width", c.lane_width},
      {"road_length", c.road_length},
      {"route_length", c.route_length},
      {"flow_min", c.flow_min},
      {"flow_max", c.flow_max},
      {"angle_min_deg", c.angle_min_deg},
      {"angle_max_deg", c.angle_max_deg},
      {"horizon", c.horizon},
      {"dt", c.dt},
      {"desired_speed_min", c.desired_speed_min},
      {"desired_speed_max", c.desired_speed_max},
      {"traffic_speed_min", c.traffic_speed_min},
      {"traffic_speed_max", c.traffic_speed_max},
      {"oncoming_traffic", c.oncoming_traffic},
      {"sensing_range", c.sensing_range},
      {"wheelbase", c.wheelbase},
      {"ego_length", c.ego_length},
      {"ego_width", c.ego_width},
      {"braking_threshold", c.braking_threshold},
      {"spawn_retries", c.spawn_retries},
      {"reward_cost",
       {{"d_ax_max", r.d_ax_max},       {"d_delta_max", r.d_delta_max},
        {"ax_min", r.ax_min},           {"ax_max", r.ax_max},
        {"delta_max", r.delta_max},     {"rho_y", r.rho_y},
        {"rho_v", r.rho_v},             {"rho_phi", r.rho_phi},
        {"rho_r", r.rho_r},             {"rho_acc", r.rho_acc},
        {"rho_delta", r.rho_delta},     {"r_live", r.r_live},
        {"huber_delta", r.huber_delta}, {"max_surrounding", r.max_surrounding},
        {"dt_ft", r.dt_ft},             {"rho_ft", r.rho_ft},
        {"rho_fs", r.rho_fs},           {"rho_ss", r.rho_ss},
        {"rho_b", r.rho_b},             {"d_front", r.d_front},
        {"d_side", r.d_side},           {"d_st", r.d_st},
        {"d_ss", r.d_ss},               {"d_b", r.d_b},
        {"space_region_scale", r.space_region_scale},
        {"collision_penalty", r.collision_penalty},
        {"out_of_area_penalty", r.out_of_area_penalty},
        {"min_speed_for_gap", r.min_speed_for_gap}}},
  };
}

MultilaneConfig multilane_config_from_json(const nlohmann::json& j) {
  MultilaneConfig c;
  if (!j.is_object()) throw ConfigError("multilane config must be a JSON object");
  const auto reference = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!reference.contains(key)) throw ConfigError("multilane config: unknown key '" + key + "'");
  }
  try {
    read_field(j, "lanes_per_direction", c.lanes_per_direction);
    read_field(j, "lane_width", c.lane_width);
    read_field(j, "road_length", c.road_length);
    read_field(j, "route_length", c.route_length);
    read_field(j, "flow_min", c.flow_min);
    read_field(j, "flow_max", c.flow_max);
    read_field(j, "angle_min_deg", c.angle_min_deg);
    read_field(j, "angle_max_deg", c.angle_max_deg);
    read_field(j, "horizon", c.horizon);
    read_field(j, "dt", c.dt);
    read_field(j, "desired_speed_min", c.desired_speed_min);
    read_field(j, "desired_speed_max", c.desired_speed_max);
    read_field(j, "traffic_speed_min", c.traffic_speed_min);
    read_field(j, "traffic_speed_max", c.traffic_speed_max);
    read_field(j, "oncoming_traffic", c.oncoming_traffic);
    read_field(j, "sensing_range", c.sensing_range);
    read_field(j, "wheelbase", c.wheelbase);
    read_field(j, "ego_length", c.ego_length);
    read_field(j, "ego_width", c.ego_width);
    read_field(j, "braking_threshold", c.braking_threshold);
    read_field(j, "spawn_retries", c.spawn_retries);
    if (j.contains("reward_cost")) {
      const auto& rj = j.at("reward_cost");
      const auto& rref = reference.at("reward_cost");
      for (const auto& [key, _] : rj.items()) {
        if (!rref.contains(key)) throw ConfigError("reward_cost: unknown key '" + key + "'");
      }
      auto& r = c.rc;
      read_field(rj, "d_ax_max", r.d_ax_max);
      read_field(rj, "d_delta_max", r.d_delta_max);
      read_field(rj, "ax_min", r.ax_min);
      read_field(rj, "ax_max", r.ax_max);
      read_field(rj, "delta_max", r.delta_max);
      read_field(rj, "rho_y", r.rho_y);
      read_field(rj, "rho_v", r.rho_v);
      read_field(rj, "rho_phi", r.rho_phi);
      read_field(rj, "rho_r", r.rho_r);
      read_field(rj, "rho_acc", r.rho_acc);
      read_field(rj, "rho_delta", r.rho_delta);
      read_field(rj, "r_live", r.r_live);
      read_field(rj, "huber_delta", r.huber_delta);
      read_field(rj, "max_surrounding", r.max_surrounding);
      read_field(rj, "dt_ft", r.dt_ft);
      read_field(rj, "rho_ft", r.rho_ft);
      read_field(rj, "rho_fs", r.rho_fs);
      read_field(rj, "rho_ss", r.rho_ss);
      read_field(rj, "rho_b", r.rho_b);
      read_field(rj, "d_front", r.d_front);
      read_field(rj, "d_side", r.d_side);
      read_field(rj, "d_st", r.d_st);
      read_field(rj, "d_ss", r.d_ss);
      read_field(rj, "d_b", r.d_b);
      read_field(rj, "space_region_scale", r.space_region_scale);
      read_field(rj, "collision_penalty", r.collision_penalty);
      read_field(rj, "out_of_area_penalty", r.out_of_area_penalty);
      read_field(rj, "min_speed_for_gap", r.min_speed_for_gap);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("multilane config: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

// --- environment ------------------------------------------------------------

MultilaneEnv::MultilaneEnv(MultilaneConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::size_t MultilaneEnv::obs_dim() const {
  return kObsBoundary + kObsEgo + kObsRef +
         kObsSurPerVehicle * static_cast<std::size_t>(config_.rc.max_surrounding);
}

double MultilaneEnv::lane_center(int lane) const {
  // Same-direction lanes lie right of the center line (l < 0), lane 0 innermost.
  if (lane >= 0) return -(lane + 0.5) * config_.lane_width;
  return (-lane - 1 + 0.5) * config_.lane_width;
}

double MultilaneEnv::ego_s() const {
  return geom::to_frenet(state_.road, state_.ego.x, state_.ego.y).s;
}

double MultilaneEnv::ego_l() const {
  return geom::to_frenet(state_.road, state_.ego.x, state_.ego.y).d;
}

int MultilaneEnv::ego_lane() const {
  const double l = ego_l();
  int k = static_cast<int>(std::floor(-l / config_.lane_width));
  return std::clamp(k, 0, config_.lanes_per_direction - 1);
}

std::pair<double, double> MultilaneEnv::boundary_distances() const {
  const double l = ego_l();
  return {-l, l + config_.lanes_per_direction * config_.lane_width};
}

geom::Box MultilaneEnv::ego_box() const {
  return {state_.ego.x, state_.ego.y, state_.ego.phi, config_.ego_length, config_.ego_width};
}

geom::Box MultilaneEnv::vehicle_box(const Vehicle& v) const {
  const auto [x, y] = geom::from_frenet(state_.road, {v.s, v.l});
  const double heading = state_.road.heading + (v.lane >= 0 ? 0.0 : std::numbers::pi);
  return {x, y, heading, v.length, v.width};
}

void MultilaneEnv::set_state(SimState s) {
  state_ = std::move(s);
  last_row_ = make_row(0.0, 0.0, EventType::kNormal);
}

std::vector<Vehicle> MultilaneEnv::spawn_lane(int lane, double l_center, double s_begin,
                                              double s_end, double flow_veh_per_h, double speed,
                                              Rng& rng) {
  std::vector<Vehicle> out;
  if (flow_veh_per_h <= 0.0 || speed <= 0.0) return out;
  const double mean_spacing = speed / (flow_veh_per_h / 3600.0);
  const double extra = std::max(mean_spacing - kMinSpacing, 0.1);
  double s = s_begin + rng.uniform() * mean_spacing;
  while (s < s_end) {
    Vehicle v;
    v.lane = lane;
    v.s = s;
    v.l = l_center + std::clamp(rng.normal(0.0, 0.15), -0.4, 0.4);
    v.desired_speed = speed * (1.0 + std::clamp(rng.normal(0.0, 0.05), -0.15, 0.15));
    v.speed = speed;
    v.length = std::clamp(4.5 + rng.normal(0.0, 0.25), 3.8, 5.5);
    v.width = std::clamp(1.8 + rng.normal(0.0, 0.08), 1.6, 2.1);
    out.push_back(v);
    s += kMinSpacing + rng.exponential(extra);
  }
  return out;
}

std::vector<double> MultilaneEnv::reset(Rng& rng) {
  const auto& c = config_;
  for (int attempt = 0;; ++attempt) {
    SimState st;
    const double angle_deg = rng.uniform(c.angle_min_deg, c.angle_max_deg);
    st.road = {0.0, 0.0, (angle_deg - 90.0) * std::numbers::pi / 180.0};
    const double flow = rng.uniform(c.flow_min, c.flow_max);
    std::vector<double> lane_speed(static_cast<std::size_t>(c.lanes_per_direction));
    const double s_begin = -100.0;
    for (int k = 0; k < c.lanes_per_direction; ++k) {
      lane_speed[static_cast<std::size_t>(k)] = rng.uniform(c.traffic_speed_min, c.traffic_speed_max);
      auto lane = spawn_lane(k, lane_center(k), s_begin, c.road_length, flow,
                             lane_speed[static_cast<std::size_t>(k)], rng);
      st.vehicles.insert(st.vehicles.end(), lane.begin(), lane.end());
    }
    if (c.oncoming_traffic) {
      for (int k = 0; k < c.lanes_per_direction; ++k) {
        const int lane = -(k + 1);
        auto opp = spawn_lane(lane, lane_center(lane), s_begin, c.road_length, flow,
                              rng.uniform(c.traffic_speed_min, c.traffic_speed_max), rng);
        st.vehicles.insert(st.vehicles.end(), opp.begin(), opp.end());
      }
    }

    // The ego takes the place of a vehicle near the start of its lane.
    const int ego_lane_idx = static_cast<int>(rng.index(static_cast<std::uint64_t>(c.lanes_per_direction)));
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < st.vehicles.size(); ++i) {
      const auto& v = st.vehicles[i];
      if (v.lane == ego_lane_idx && v.s >= -20.0 && v.s <= 40.0) candidates.push_back(i);
    }
    double s0 = 0.0;
    double v0 = lane_speed[static_cast<std::size_t>(ego_lane_idx)];
    if (!candidates.empty()) {
      const auto pick = candidates[rng.index(candidates.size())];
      s0 = st.vehicles[pick].s;
      v0 = st.vehicles[pick].speed;
      st.vehicles.erase(st.vehicles.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    const double l0 = lane_center(ego_lane_idx) + std::clamp(rng.normal(0.0, 0.1), -0.3, 0.3);
    const auto [ex, ey] = geom::from_frenet(st.road, {s0, l0});
    st.ego = EgoState{};
    st.ego.x = ex;
    st.ego.y = ey;
    st.ego.phi = st.road.heading + std::clamp(rng.normal(0.0, 0.01), -0.03, 0.03);
    st.ego.vx = std::max(0.0, v0 + rng.normal(0.0, 0.5));

    std::vector<int> refs;
    for (int k = ego_lane_idx - 1; k <= ego_lane_idx + 1; ++k) {
      if (k >= 0 && k < c.lanes_per_direction) refs.push_back(k);
    }
    st.ref_lane = refs[rng.index(refs.size())];
    st.desired_speed = rng.uniform(c.desired_speed_min, c.desired_speed_max);
    st.s_start = s0;
    st.step = 0;
    state_ = std::move(st);

    // Infeasible spawn: some vehicle overlaps a padded ego footprint.
    geom::Box padded = ego_box();
    padded.length += 4.0;
    padded.width += 0.4;
    const bool overlap = std::any_of(state_.vehicles.begin(), state_.vehicles.end(),
                                     [&](const Vehicle& v) {
                                       return std::abs(v.s - s0) < 15.0 &&
                                              geom::boxes_overlap(padded, vehicle_box(v));
                                     });
    if (!overlap) break;
    if (attempt + 1 >= c.spawn_retries) {
      std::erase_if(state_.vehicles, [&](const Vehicle& v) {
        return std::abs(v.s - s0) < 15.0 && geom::boxes_overlap(padded, vehicle_box(v));
      });
      break;
    }
  }
  last_row_ = make_row(0.0, 0.0, EventType::kNormal);
  return observe();
}

void MultilaneEnv::advance_traffic() {
  const double dt = config_.dt;
  const double es = ego_s();
  const double el = ego_l();
  const double ego_reach = 0.5 * config_.lane_width + 0.5 * config_.ego_width - 0.25;

  std::vector<std::size_t> order(state_.vehicles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto progress = [&](const Vehicle& v) { return v.lane >= 0 ? v.s : -v.s; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& va = state_.vehicles[a];
    const auto& vb = state_.vehicles[b];
    if (va.lane != vb.lane) return va.lane < vb.lane;
    return progress(va) > progress(vb);
  });

  std::vector<double> accel(state_.vehicles.size(), 0.0);
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const auto& v = state_.vehicles[order[idx]];
    double gap = std::numeric_limits<double>::infinity();
    double dv = 0.0;
    if (idx > 0) {
      const auto& lead = state_.vehicles[order[idx - 1]];
      if (lead.lane == v.lane) {
        gap = progress(lead) - progress(v) - 0.5 * (lead.length + v.length);
        dv = v.speed - lead.speed;
      }
    }
    if (v.lane >= 0 && std::abs(el - v.l) < ego_reach && es > v.s) {
      const double ego_gap = es - v.s - 0.5 * (config_.ego_length + v.length);
      if (ego_gap < gap) {
        gap = ego_gap;
        dv = v.speed - state_.ego.vx;
      }
    }
    accel[order[idx]] = idm_accel(v.speed, v.desired_speed, gap, dv);
  }
  for (std::size_t i = 0; i < state_.vehicles.size(); ++i) {
    auto& v = state_.vehicles[i];
    const double a = std::clamp(accel[i], -6.0, kIdmAccel);
    const double new_speed = std::max(0.0, v.speed + a * dt);
    const double ds = 0.5 * (v.speed + new_speed) * dt;
    v.s += v.lane >= 0 ? ds : -ds;
    v.speed = new_speed;
  }
}

bool MultilaneEnv::check_collision() const {
  const auto ego = ego_box();
  const double es = ego_s();
  for (const auto& v : state_.vehicles) {
    if (std::abs(v.s - es) > 12.0) continue;
    if (geom::boxes_overlap(ego, vehicle_box(v))) return true;
  }
  return false;
}

std::vector<SurVehicle> MultilaneEnv::surrounding() const {
  const auto& e = state_.ego;
  const double es = ego_s();
  std::vector<std::pair<double, SurVehicle>> found;
  for (const auto& v : state_.vehicles) {
    if (std::abs(v.s - es) > config_.sensing_range + 10.0) continue;
    const auto box = vehicle_box(v);
    const auto [x, y] = geom::to_body(e.x, e.y, e.phi, box.x, box.y);
    const double dist = std::hypot(x, y);
    if (dist > config_.sensing_range) continue;
    const double rel = box.heading - e.phi;
    found.push_back({dist, {x, y, std::cos(rel), std::sin(rel), v.speed, v.length, v.width, 1.0}});
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<SurVehicle> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(f.second);
  return out;
}

RefTrajectory MultilaneEnv::reference() const {
  RefTrajectory ref;
  ref.lane = state_.ref_lane;
  ref.desired_speed = state_.desired_speed;
  const auto& e = state_.ego;
  const double es = ego_s();
  const double l_ref = lane_center(state_.ref_lane);
  const double rel = state_.road.heading - e.phi;
  for (std::size_t k = 0; k < kRefHorizons.size(); ++k) {
    const double s = es + state_.desired_speed * kRefHorizons[k];
    const auto [wx, wy] = geom::from_frenet(state_.road, {s, l_ref});
    const auto [x, y] = geom::to_body(e.x, e.y, e.phi, wx, wy);
    ref.points[k] = {x, y, std::cos(rel), std::sin(rel), state_.desired_speed};
  }
  return ref;
}

std::vector<double> MultilaneEnv::observe() const {
  std::vector<double> obs;
  obs.reserve(obs_dim());
  const auto [dl, dr] = boundary_distances();
  obs.push_back(dl);
  obs.push_back(dr);
  const auto& e = state_.ego;
  for (double v : {e.vx, e.vy, e.r, e.delta, e.ax, e.delta_prev, e.ax_prev}) obs.push_back(v);
  const auto ref = reference();
  for (const auto& p : ref.points) obs.insert(obs.end(), p.begin(), p.end());
  const auto sur = surrounding();
  const auto slots = static_cast<std::size_t>(config_.rc.max_surrounding);
  for (std::size_t i = 0; i < slots; ++i) {
    if (i < sur.size()) {
      const auto& s = sur[i];
      for (double v : {s.x, s.y, s.cos_phi, s.sin_phi, s.v, s.length, s.width, s.mask}) {
        obs.push_back(v);
      }
    } else {
      obs.insert(obs.end(), kObsSurPerVehicle, 0.0);
    }
  }
  return obs;
}

std::vector<double> MultilaneEnv::obs_scale() const {
  std::vector<double> s;
  s.reserve(obs_dim());
  const double w = config_.lane_width;
  s.push_back(1.0 / (2.0 * w));
  s.push_back(1.0 / (2.0 * w));
  const auto& r = config_.rc;
  for (double v : {0.1, 1.0, 2.0, 1.0 / r.delta_max, 1.0 / std::abs(r.ax_min), 1.0 / r.delta_max,
                   1.0 / std::abs(r.ax_min)}) {
    s.push_back(v);
  }
  for (int k = 0; k < 4; ++k) {
    for (double v : {0.1, 1.0 / w, 1.0, 10.0, 0.1}) s.push_back(v);
  }
  for (int i = 0; i < r.max_surrounding; ++i) {
    for (double v : {1.0 / 50.0, 1.0 / 10.0, 1.0, 1.0, 0.1, 0.2, 0.5, 1.0}) s.push_back(v);
  }
  return s;
}

RewardBreakdown MultilaneEnv::reward(std::span<const double> increments) const {
  const auto& r = config_.rc;
  const auto& e = state_.ego;
  const double y_err = ego_l() - lane_center(state_.ref_lane);
  const double v_err = e.vx - state_.desired_speed;
  const double phi_err = geom::wrap_angle(e.phi - state_.road.heading);
  const double d_ax = increments.size() > 0 ? increments[0] : 0.0;
  const double d_delta = increments.size() > 1 ? increments[1] : 0.0;
  RewardBreakdown out;
  out.tracking = -r.rho_y * geom::huber(y_err, r.huber_delta) -
                 r.rho_v * geom::huber(v_err, r.huber_delta) -
                 r.rho_phi * geom::huber(phi_err, r.huber_delta);
  out.action = -r.rho_acc * e.ax * e.ax - r.rho_delta * e.delta * e.delta;
  out.comfort = -r.rho_r * geom::huber(e.r, r.huber_delta) - r.rho_acc * d_ax * d_ax -
                r.rho_delta * d_delta * d_delta;
  out.live = r.r_live;
  return out;
}

CostBreakdown MultilaneEnv::cost(bool collided, bool out_of_area) const {
  const auto& r = config_.rc;
  const auto& e = state_.ego;
  CostBreakdown out;
  const double es = ego_s();
  const double front_scale = std::max(e.vx, r.min_speed_for_gap) * r.dt_ft;
  double nearest_front = std::numeric_limits<double>::infinity();
  const double k = r.space_region_scale;
  for (const auto& v : state_.vehicles) {
    if (std::abs(v.s - es) > r.d_front + 10.0) continue;
    const auto box = vehicle_box(v);
    const auto [x, y] = geom::to_body(e.x, e.y, e.phi, box.x, box.y);
    const double ay = std::abs(y);
    if (x >= 0.0 && x <= r.d_front && ay <= r.d_side) nearest_front = std::min(nearest_front, x);
    if (x >= 0.0 && x <= r.d_st * k && ay <= r.d_side) {
      out.space += r.rho_fs * (1.0 - std::tanh(x / r.d_st));
    } else if (std::abs(x) <= v.length && ay > r.d_side && ay <= r.d_ss * k) {
      out.space += r.rho_ss * (1.0 - std::tanh(ay / r.d_ss));
    }
  }
  if (std::isfinite(nearest_front)) {
    out.front = r.rho_ft * (1.0 - std::tanh(nearest_front / front_scale));
  }
  const auto [dl, dr] = boundary_distances();
  out.boundary = r.rho_b * (1.0 - std::tanh(std::max(std::min(dl, dr), 0.0) / r.d_b));
  if (collided) out.terminal += r.collision_penalty;
  if (out_of_area) out.terminal += r.out_of_area_penalty;
  return out;
}

StepResult MultilaneEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw ConfigError("multilane: action must have 2 components");
  const auto& r = config_.rc;
  auto& e = state_.ego;
  const double d_ax = std::clamp(action[0], -1.0, 1.0) * r.d_ax_max;
  const double d_delta = std::clamp(action[1], -1.0, 1.0) * r.d_delta_max;
  e.ax_prev = e.ax;
  e.delta_prev = e.delta;
  e.ax = std::clamp(e.ax + d_ax, r.ax_min, r.ax_max);
  e.delta = std::clamp(e.delta + d_delta, -r.delta_max, r.delta_max);

  // Kinematic bicycle about the center of gravity (midway between axles).
  const double dt = config_.dt;
  const double lr = 0.5 * config_.wheelbase;
  e.r = e.vx * std::tan(e.delta) / config_.wheelbase;
  e.vy = e.r * lr;
  const double c = std::cos(e.phi);
  const double s = std::sin(e.phi);
  e.x += (e.vx * c - e.vy * s) * dt;
  e.y += (e.vx * s + e.vy * c) * dt;
  e.phi += e.r * dt;
  e.vx = std::max(0.0, e.vx + e.ax * dt);

  advance_traffic();
  state_.step += 1;

  const bool collided = check_collision();
  const auto [dl, dr] = boundary_distances();
  const bool out_of_area = std::min(dl, dr) <= 0.0;
  const std::array<double, 2> inc{d_ax, d_delta};
  StepResult res;
  res.reward = reward(inc).total();
  res.cost = cost(collided, out_of_area).total();
  res.terminal = collided || out_of_area;
  if (collided) {
    res.event = EventType::kCollision;
  } else if (out_of_area) {
    res.event = EventType::kOutOfArea;
  } else if (e.ax <= -config_.braking_threshold) {
    res.event = EventType::kBraking;
  }
  if (!res.terminal) {
    if (ego_s() - state_.s_start >= config_.route_length) {
      res.truncated = true;
      res.arrived = true;
    } else if (state_.step >= config_.horizon) {
      res.truncated = true;
    }
  }
  res.obs = observe();
  last_row_ = make_row(res.reward, res.cost, res.event);
  return res;
}

TrajectoryRow MultilaneEnv::make_row(double reward, double cost, EventType ev) const {
  TrajectoryRow row;
  const auto& e = state_.ego;
  row.step = state_.step;
  row.x = e.x;
  row.y = e.y;
  row.phi = e.phi;
  row.v_x = e.vx;
  row.a_x = e.ax;
  row.delta = e.delta;
  row.y_err = ego_l() - lane_center(state_.ref_lane);
  row.phi_err = geom::wrap_angle(e.phi - state_.road.heading);
  row.reward = reward;
  row.cost = cost;
  row.event = ev;
  return row;
}

int select_reference(const MultilaneEnv& env,
                     const std::function<double(std::span<const double>)>& score) {
  const int current = env.ego_lane();
  MultilaneEnv probe = env;
  SimState st = env.state();
  int best = current;
  st.ref_lane = current;
  probe.set_state(st);
  double best_score = score(probe.observe());
  for (int lane : {current - 1, current + 1}) {
    if (lane < 0 || lane >= env.config().lanes_per_direction) continue;
    st.ref_lane = lane;
    probe.set_state(st);
    const double v = score(probe.observe());
    if (v > best_score) {
      best_score = v;
      best = lane;
    }
  }
  return best;
}

}  // namespace dsach::env
