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

#include "dsach/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dsach::geom {

std::array<std::pair<double, double>, 4> Box::corners() const {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  const std::array<std::pair<double, double>, 4> local{{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
  std::array<std::pair<double, double>, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = {x + c * local[i].first - s * local[i].second,
              y + s * local[i].first + c * local[i].second};
  }
  return out;
}

namespace {

// Projection interval of a box onto the unit axis (ax, ay).
std::pair<double, double> project(const Box& b, double ax, double ay) {
  const double center = b.x * ax + b.y * ay;
  const double c = std::cos(b.heading);
  const double s = std::sin(b.heading);
  const double extent =
      0.5 * b.length * std::abs(c * ax + s * ay) + 0.5 * b.width * std::abs(-s * ax + c * ay);
  return {center - extent, center + extent};
}

}  // namespace

bool boxes_overlap(const Box& a, const Box& b) {
  const std::array<double, 4> angles{a.heading, a.heading + std::numbers::pi / 2, b.heading,
                                     b.heading + std::numbers::pi / 2};
  for (double ang : angles) {
    const double ax = std::cos(ang);
    const double ay = std::sin(ang);
    const auto [a0, a1] = project(a, ax, ay);
    const auto [b0, b1] = project(b, ax, ay);
    if (a1 < b0 || b1 < a0) return false;
  }
  return true;
}

bool box_contains(const Box& b, double px, double py) {
  const auto [lx, ly] = to_body(b.x, b.y, b.heading, px, py);
  return std::abs(lx) <= 0.5 * b.length && std::abs(ly) <= 0.5 * b.width;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  return r - std::numbers::pi;
}

double huber(double x, double delta) {
  const double ax = std::abs(x);
  return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
}

Frenet to_frenet(const StraightLine& line, double x, double y) {
  const auto [s, d] = to_body(line.x0, line.y0, line.heading, x, y);
  return {s, d};
}

std::pair<double, double> from_frenet(const StraightLine& line, const Frenet& f) {
  const double c = std::cos(line.heading);
  const double s = std::sin(line.heading);
  return {line.x0 + c * f.s - s * f.d, line.y0 + s * f.s + c * f.d};
}

std::pair<double, double> to_body(double x, double y, double heading, double px, double py) {
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  const double dx = px - x;
  const double dy = py - y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

}  // namespace dsach::geom
