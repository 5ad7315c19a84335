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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dsach/errors.hpp"
#include "dsach/toy.hpp"

using namespace dsach;
using namespace dsach::env;

namespace {

nlohmann::json fixture() {
  std::ifstream in(std::string(DSACH_FIXTURE_DIR) + "/toy_dp.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("starting at the goal ends immediately with the bonus") {
  ToyEnv env;
  env.reset_to(env.config().goal);
  const std::array<double, 2> zero{0.0, 0.0};
  const auto r = env.step(zero);
  CHECK(r.terminal);
  CHECK(r.arrived);
  CHECK(r.reward == 10.0);
}

TEST_CASE("standing still outside the hazard accrues no cost") {
  ToyEnv env;
  env.reset_to({-0.6, 0.5});
  const std::array<double, 2> zero{0.0, 0.0};
  double cost = 0.0;
  int steps = 0;
  for (;;) {
    const auto r = env.step(zero);
    cost += r.cost;
    ++steps;
    if (r.episode_over()) {
      CHECK(r.truncated);
      CHECK_FALSE(r.terminal);
      break;
    }
  }
  CHECK(cost == 0.0);
  CHECK(steps == 200);
}

TEST_CASE("straight line through the hazard costs the steps spent inside") {
  const ToyConfig c;
  ToyEnv env(c);
  env.reset_to(c.start);
  const std::array<double, 2> right{1.0, 0.0};
  double cost = 0.0;
  int steps = 0;
  for (;;) {
    const auto r = env.step(right);
    cost += r.cost;
    ++steps;
    if (r.episode_over()) break;
  }
  // Positions x_k = -0.6 + 0.05 k on y = 0; inside while |x_k| <= half-chord.
  const double dy = c.hazard_center[1];
  const double half = std::sqrt(c.hazard_radius * c.hazard_radius - dy * dy);
  int inside = 0;
  for (int k = 1; k <= steps; ++k) inside += std::abs(-0.6 + 0.05 * k - c.hazard_center[0]) <= half;
  CHECK(cost == inside);
  CHECK(inside == 11);
}

TEST_CASE("positions are clipped to the square") {
  ToyEnv env;
  env.reset_to({0.99, -0.99});
  const std::array<double, 2> a{5.0, -5.0};
  env.step(a);
  CHECK(env.position()[0] == 1.0);
  CHECK(env.position()[1] == -1.0);
}

TEST_CASE("observation layout") {
  ToyEnv env;
  const auto o = env.reset_to({0.1, 0.2});
  REQUIRE(o.size() == 6);
  CHECK(o[0] == 0.1);
  CHECK(o[2] == doctest::Approx(0.5));
  CHECK(o[5] == doctest::Approx(0.22));
}

TEST_CASE("dp with gamma = 0 gives the immediate reward field") {
  const ToyConfig c;
  const auto dp = dp_oracle(c, 41, 0.0);
  ToyEnv probe(c);
  for (int s = 0; s < 41 * 41; s += 37) {
    const std::array<double, 2> p{dp.coord(s % 41), dp.coord(s / 41)};
    if (probe.at_goal(p)) continue;
    double best = -1e9;
    for (int k = 0; k < 9; ++k) {
      const auto a = dp_action(k);
      std::array<double, 2> q{std::clamp(p[0] + 0.05 * a[0], -1.0, 1.0),
                              std::clamp(p[1] + 0.05 * a[1], -1.0, 1.0)};
      q = {dp.coord(dp.nearest(q[0])), dp.coord(dp.nearest(q[1]))};
      const double r = -std::hypot(q[0] - c.goal[0], q[1] - c.goal[1]) + (probe.at_goal(q) ? 10.0 : 0.0);
      best = std::max(best, r);
    }
    CHECK(dp.v_r_unconstrained[static_cast<std::size_t>(s)] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("dp without a hazard: constrained and unconstrained coincide") {
  ToyConfig c;
  c.hazard_radius = 0.0;
  const auto dp = dp_oracle(c, 41, 0.95);
  for (std::size_t s = 0; s < dp.v_r.size(); ++s) CHECK(dp.v_r[s] == dp.v_r_unconstrained[s]);
}

TEST_CASE("41 x 41 dp matches the independent reference oracle") {
  const auto f = fixture();
  const ToyConfig c;
  const auto dp = dp_oracle(c, f.at("grid_n"), f.at("gamma"));
  CHECK(dp.residual <= 1e-8);
  const int start = dp.cell(c.start);
  CHECK(dp.v_r_unconstrained[static_cast<std::size_t>(start)] ==
        doctest::Approx(f.at("v_r_unconstrained_start").get<double>()).epsilon(1e-9));
  CHECK(dp.v_r[static_cast<std::size_t>(start)] ==
        doctest::Approx(f.at("v_r_constrained_start").get<double>()).epsilon(1e-9));
  CHECK(dp.v_c[static_cast<std::size_t>(start)] == 0.0);
  const auto roll = dp_rollout(c, dp);
  CHECK(roll.ret == doctest::Approx(f.at("rollout_return").get<double>()).epsilon(1e-9));
  CHECK(roll.cost == f.at("rollout_cost").get<double>());
  CHECK(roll.length == f.at("rollout_length").get<int>());
  CHECK(roll.arrived == f.at("rollout_arrived").get<bool>());
}

TEST_CASE("dp preconditions") {
  CHECK_THROWS_AS(dp_oracle(ToyConfig{}, 11, 0.9), ConfigError);
  CHECK_THROWS_AS(dp_oracle(ToyConfig{}, 41, 1.0), ConfigError);
}

TEST_CASE("toy configuration JSON") {
  const ToyConfig c;
  const auto j = to_json(c);
  CHECK(to_json(toy_config_from_json(j)) == j);
  auto bad = j;
  bad["wind"] = 1.0;
  CHECK_THROWS_AS(toy_config_from_json(bad), ConfigError);
  auto bad2 = j;
  bad2["step_size"] = -0.1;
  CHECK_THROWS_AS(toy_config_from_json(bad2), ConfigError);
}
