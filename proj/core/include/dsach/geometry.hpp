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
#include <utility>

namespace dsach::geom {

/// Oriented rectangle: center, heading (rad), full length along the heading
/// and full width across it.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;

  std::array<std::pair<double, double>, 4> corners() const;
};

/// Separating-axis overlap test for two oriented rectangles. Touching edges
/// count as overlap.
bool boxes_overlap(const Box& a, const Box& b);

bool box_contains(const Box& b, double px, double py);

/// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

/// Huber loss with threshold delta: x^2/2 inside, delta(|x| - delta/2) outside.
double huber(double x, double delta = 1.0);

/// Straight reference line through (x0, y0) with the given heading.
struct StraightLine {
  double x0 = 0.0;
  double y0 = 0.0;
  double heading = 0.0;
};

/// Curvilinear coordinates: s along the line, d to its left.
struct Frenet {
  double s = 0.0;
  double d = 0.0;
};

Frenet to_frenet(const StraightLine& line, double x, double y);
std::pair<double, double> from_frenet(const StraightLine& line, const Frenet& f);

/// Expresses the world point (px, py) in the frame of a body at (x, y) with
/// heading `heading`.
std::pair<double, double> to_body(double x, double y, double heading, double px, double py);

}  // namespace dsach::geom
