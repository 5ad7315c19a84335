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

#include "dsach/toy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsach/errors.hpp"

namespace dsach::env {
namespace {

double dist(std::array<double, 2> a, std::array<double, 2> b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

void ToyConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("toy config: ") + what);
  };
  require(goal_radius > 0.0, "goal_radius must be positive");
  require(hazard_radius >= 0.0, "hazard_radius must be >= 0");
  require(step_size > 0.0 && step_size <= 1.0, "step_size must lie in (0, 1]");
  require(start_jitter >= 0.0, "start_jitter must be >= 0");
  require(horizon >= 1, "horizon must be >= 1");
  for (double v : {start[0], start[1], goal[0], goal[1]}) {
    require(v >= -1.0 && v <= 1.0, "start and goal must lie in [-1, 1]^2");
  }
}

nlohmann::json to_json(const ToyConfig& c) {
  return {{"start", c.start},
          {"start_jitter", c.start_jitter},
          {"goal", c.goal},
          {"goal_radius", c.goal_radius},
          {"hazard_center", c.hazard_center},
          {"hazard_radius", c.hazard_radius},
          {"step_size", c.step_size},
          {"goal_bonus", c.goal_bonus},
          {"horizon", c.horizon}};
}

ToyConfig toy_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("toy config must be a JSON object");
  ToyConfig c;
  const auto reference = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!reference.contains(key)) throw ConfigError("toy config: unknown key '" + key + "'");
  }
  try {
    if (j.contains("start")) c.start = j.at("start").get<std::array<double, 2>>();
    if (j.contains("start_jitter")) c.start_jitter = j.at("start_jitter").get<double>();
    if (j.contains("goal")) c.goal = j.at("goal").get<std::array<double, 2>>();
    if (j.contains("goal_radius")) c.goal_radius = j.at("goal_radius").get<double>();
    if (j.contains("hazard_center")) {
      c.hazard_center = j.at("hazard_center").get<std::array<double, 2>>();
    }
    if (j.contains("hazard_radius")) c.hazard_radius = j.at("hazard_radius").get<double>();
    if (j.contains("step_size")) c.step_size = j.at("step_size").get<double>();
    if (j.contains("goal_bonus")) c.goal_bonus = j.at("goal_bonus").get<double>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("toy config: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

ToyEnv::ToyEnv(ToyConfig config) : config_(config) { config_.validate(); }

bool ToyEnv::in_hazard(std::array<double, 2> p) const {
  return dist(p, config_.hazard_center) < config_.hazard_radius;
}

bool ToyEnv::at_goal(std::array<double, 2> p) const {
  // Grid points sit exactly on the rim; accumulated rounding must not push
  // them out.
  return dist(p, config_.goal) <= config_.goal_radius + 1e-9;
}

std::vector<double> ToyEnv::observe() const {
  const auto& g = config_.goal;
  const auto& h = config_.hazard_center;
  return {pos_[0], pos_[1], g[0] - pos_[0], g[1] - pos_[1], pos_[0] - h[0], pos_[1] - h[1]};
}

std::vector<double> ToyEnv::reset_to(std::array<double, 2> pos) {
  pos_ = {std::clamp(pos[0], -1.0, 1.0), std::clamp(pos[1], -1.0, 1.0)};
  steps_ = 0;
  row_ = TrajectoryRow{};
  row_.x = pos_[0];
  row_.y = pos_[1];
  return observe();
}

std::vector<double> ToyEnv::reset(Rng& rng) {
  const double j = config_.start_jitter;
  return reset_to({config_.start[0] + rng.uniform(-j, j), config_.start[1] + rng.uniform(-j, j)});
}

StepResult ToyEnv::step(std::span<const double> action) {
  if (action.size() != 2) throw ConfigError("toy: action must have 2 components");
  const std::array<double, 2> prev = pos_;
  for (std::size_t i = 0; i < 2; ++i) {
    const double a = std::clamp(action[i], -1.0, 1.0);
    pos_[i] = std::clamp(pos_[i] + config_.step_size * a, -1.0, 1.0);
  }
  ++steps_;
  StepResult res;
  const bool reached = at_goal(pos_);
  res.reward = -dist(pos_, config_.goal) + (reached ? config_.goal_bonus : 0.0);
  res.cost = in_hazard(pos_) ? 1.0 : 0.0;
  res.terminal = reached;
  res.arrived = reached;
  res.truncated = !reached && steps_ >= config_.horizon;
  res.event = res.cost > 0.0 ? EventType::kCollision : EventType::kNormal;
  res.obs = observe();

  row_.step = steps_;
  row_.x = pos_[0];
  row_.y = pos_[1];
  row_.phi = std::atan2(pos_[1] - prev[1], pos_[0] - prev[0]);
  row_.v_x = dist(pos_, prev);
  row_.a_x = 0.0;
  row_.delta = 0.0;
  row_.y_err = pos_[1] - config_.goal[1];
  row_.phi_err = 0.0;
  row_.reward = res.reward;
  row_.cost = res.cost;
  row_.event = res.event;
  return res;
}

// --- dynamic programming oracle ----------------------------------------------

int DpResult::nearest(double x) const {
  const double t = (x + 1.0) * 0.5 * (grid_n - 1);
  return std::clamp(static_cast<int>(std::lround(t)), 0, grid_n - 1);
}

std::array<double, 2> dp_action(int k) {
  return {static_cast<double>(k % 3 - 1), static_cast<double>(k / 3 - 1)};
}

DpResult dp_oracle(const ToyConfig& config, int grid_n, double gamma) {
  config.validate();
  if (grid_n < 21) throw ConfigError("dp_oracle: grid_n must be >= 21");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("dp_oracle: gamma must lie in [0, 1)");

  DpResult out;
  out.grid_n = grid_n;
  out.gamma = gamma;
  const int n = grid_n * grid_n;
  const ToyEnv probe(config);

  // Deterministic transition table: successor cell, reward, cost, terminal.
  std::vector<int> next(static_cast<std::size_t>(n) * 9);
  std::vector<double> rew(next.size());
  std::vector<double> cst(next.size());
  std::vector<char> absorbing(static_cast<std::size_t>(n));
  std::vector<char> hazard_next(next.size());
  for (int j = 0; j < grid_n; ++j) {
    for (int i = 0; i < grid_n; ++i) {
      const int s = i + grid_n * j;
      const std::array<double, 2> p{out.coord(i), out.coord(j)};
      absorbing[static_cast<std::size_t>(s)] = probe.at_goal(p);
      for (int k = 0; k < 9; ++k) {
        const auto a = dp_action(k);
        const std::array<double, 2> q{std::clamp(p[0] + config.step_size * a[0], -1.0, 1.0),
                                      std::clamp(p[1] + config.step_size * a[1], -1.0, 1.0)};
        const int t = out.cell(q);
        const std::array<double, 2> qs{out.coord(t % grid_n), out.coord(t / grid_n)};
        const auto e = static_cast<std::size_t>(s) * 9 + static_cast<std::size_t>(k);
        next[e] = t;
        const bool reached = probe.at_goal(qs);
        rew[e] = -dist(qs, config.goal) + (reached ? config.goal_bonus : 0.0);
        cst[e] = probe.in_hazard(qs) ? 1.0 : 0.0;
        hazard_next[e] = probe.in_hazard(qs);
      }
    }
  }

  auto solve = [&](bool constrained, std::vector<double>& v, std::vector<int>* policy) {
    v.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> nv(v.size());
    int sweeps = 0;
    double residual = std::numeric_limits<double>::infinity();
    while (residual > 1e-8) {
      residual = 0.0;
      for (int s = 0; s < n; ++s) {
        const auto su = static_cast<std::size_t>(s);
        if (absorbing[su]) {
          nv[su] = 0.0;
          continue;
        }
        bool any_safe = false;
        if (constrained) {
          for (int k = 0; k < 9; ++k) any_safe |= !hazard_next[su * 9 + static_cast<std::size_t>(k)];
        }
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 9; ++k) {
          const auto e = su * 9 + static_cast<std::size_t>(k);
          if (constrained && any_safe && hazard_next[e]) continue;
          const double q = rew[e] + gamma * v[static_cast<std::size_t>(next[e])];
          best = std::max(best, q);
        }
        nv[su] = best;
        residual = std::max(residual, std::abs(best - v[su]));
      }
      v.swap(nv);
      ++sweeps;
      if (sweeps > 1'000'000) throw NumericalError("dp_oracle: value iteration did not converge");
    }
    if (policy) {
      policy->assign(static_cast<std::size_t>(n), 4);
      for (int s = 0; s < n; ++s) {
        const auto su = static_cast<std::size_t>(s);
        if (absorbing[su]) continue;
        bool any_safe = false;
        for (int k = 0; k < 9; ++k) any_safe |= !hazard_next[su * 9 + static_cast<std::size_t>(k)];
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 9; ++k) {
          const auto e = su * 9 + static_cast<std::size_t>(k);
          if (constrained && any_safe && hazard_next[e]) continue;
          const double q = rew[e] + gamma * v[static_cast<std::size_t>(next[e])];
          if (q > best) {
            best = q;
            (*policy)[su] = k;
          }
        }
      }
    }
    return std::pair{sweeps, residual};
  };

  solve(false, out.v_r_unconstrained, nullptr);
  const auto [sweeps, residual] = solve(true, out.v_r, &out.policy);
  out.sweeps = sweeps;
  out.residual = residual;

  // Cost value of the fixed constrained policy.
  out.v_c.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> nv(out.v_c.size());
  double res = std::numeric_limits<double>::infinity();
  int guard = 0;
  while (res > 1e-8) {
    res = 0.0;
    for (int s = 0; s < n; ++s) {
      const auto su = static_cast<std::size_t>(s);
      if (absorbing[su]) {
        nv[su] = 0.0;
        continue;
      }
      const auto e = su * 9 + static_cast<std::size_t>(out.policy[su]);
      nv[su] = cst[e] + gamma * out.v_c[static_cast<std::size_t>(next[e])];
      res = std::max(res, std::abs(nv[su] - out.v_c[su]));
    }
    out.v_c.swap(nv);
    if (++guard > 1'000'000) throw NumericalError("dp_oracle: cost evaluation did not converge");
  }
  return out;
}

RolloutSummary dp_rollout(const ToyConfig& config, const DpResult& dp) {
  ToyEnv env(config);
  env.reset_to(config.start);
  RolloutSummary out;
  for (;;) {
    const auto a = dp_action(dp.policy[static_cast<std::size_t>(dp.cell(env.position()))]);
    const auto r = env.step(a);
    out.ret += r.reward;
    out.cost += r.cost;
    ++out.length;
    if (r.episode_over()) {
      out.arrived = r.arrived;
      break;
    }
  }
  return out;
}

}  // namespace dsach::env
