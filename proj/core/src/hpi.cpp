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

#include "dsach/hpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsach/errors.hpp"

namespace dsach::hpi {
namespace {

using nn::dot;
using nn::norm;

// Scalar summary of the problem; every quantity the 1-D dual needs.
struct Geometry {
  double p_r = 0.0;   // <g_r, g_hat>
  double p_c = 0.0;   // <g_c, g_hat>
  double a_dd = 0.0;  // ||g_r - g_c||^2
  double a_cd = 0.0;  // <g_c, g_r - g_c>
  double a_cc = 0.0;  // ||g_c||^2
  double radius = 0.0;

  double weighted_norm(double w) const {
    const double sq = a_cc + 2.0 * w * a_cd + w * w * a_dd;
    return std::sqrt(std::max(sq, 0.0));
  }

  // d phi / dw = <g_r - g_c, h(w)>: positive means g_c is the worse objective.
  double gap(double w) const {
    const double n = weighted_norm(w);
    const double base = p_r - p_c;
    if (n <= std::numeric_limits<double>::min()) return base;
    return base + radius * (a_cd + w * a_dd) / n;
  }

  double curvature(double w) const {
    const double n = weighted_norm(w);
    if (n <= std::numeric_limits<double>::min()) return std::numeric_limits<double>::infinity();
    const double s = a_cd + w * a_dd;
    return radius * std::max(a_dd * n * n - s * s, 0.0) / (n * n * n);
  }
};

void assemble(const HpiProblem& p, const GradientVector& g_hat, double radius, double w,
              HarmonicSolution& out) {
  const std::size_t n = g_hat.size();
  GradientVector g_w{std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) g_w[i] = w * p.g_r[i] + (1.0 - w) * p.g_c[i];
  const double gw_norm = norm(g_w.span());
  out.h = g_hat;
  if (gw_norm > 0.0) {
    const double scale = radius / gw_norm;
    for (std::size_t i = 0; i < n; ++i) out.h[i] += scale * g_w[i];
  }
  if (g_hat.layout()) out.h = GradientVector(g_hat.layout(), std::move(out.h.values()));
  out.w_star = w;
}

void finalize(const HpiProblem& p, const GradientVector& g_hat, HarmonicSolution& out) {
  out.inner_r = dot(p.g_r.span(), out.h.span());
  out.inner_c = dot(p.g_c.span(), out.h.span());
  out.worst_inner = std::min(out.inner_r, out.inner_c);
  double dist_sq = 0.0;
  for (std::size_t i = 0; i < g_hat.size(); ++i) {
    const double d = out.h[i] - g_hat[i];
    dist_sq += d * d;
  }
  out.feasibility_slack = out.radius - std::sqrt(dist_sq);
}

}  // namespace

void HpiProblem::validate() const {
  if (g_r.size() != g_c.size()) {
    throw ConfigError("hpi: gradient lengths differ (" + std::to_string(g_r.size()) + " vs " +
                      std::to_string(g_c.size()) + ")");
  }
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("hpi: rho must lie in [0, 1)");
  if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("hpi: lambda must be finite and >= 0");
  if (max_iter < 1) throw ConfigError("hpi: max_iter must be positive");
  g_r.require_finite("hpi g_r");
  g_c.require_finite("hpi g_c");
}

GradientVector nominal_gradient(std::span<const double> g_r, std::span<const double> g_c,
                                double lambda) {
  if (g_r.size() != g_c.size()) throw ConfigError("nominal_gradient: length mismatch");
  std::vector<double> out(g_r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_r[i] + lambda * g_c[i];
  return GradientVector(std::move(out));
}

ConflictReport detect_conflict(std::span<const double> g_r, std::span<const double> g_c) {
  const double inner = dot(g_r, g_c);
  return {inner, inner < 0.0};
}

HarmonicSolution solve_harmonic(const HpiProblem& problem) {
  problem.validate();
  GradientVector g_hat = nominal_gradient(problem.g_r.span(), problem.g_c.span(), problem.lambda);
  if (problem.g_r.layout()) g_hat = GradientVector(problem.g_r.layout(), std::move(g_hat.values()));

  HarmonicSolution out;
  const double g_hat_norm = norm(g_hat.span());
  if (g_hat_norm == 0.0) {
    out.h = g_hat;
    out.degenerate = true;
    return out;
  }

  Geometry geo;
  geo.p_r = dot(problem.g_r.span(), g_hat.span());
  geo.p_c = dot(problem.g_c.span(), g_hat.span());
  geo.radius = problem.rho * g_hat_norm;
  out.radius = geo.radius;

  if (problem.rho == 0.0) {
    out.h = g_hat;
    out.w_star = geo.p_r <= geo.p_c ? 1.0 : 0.0;
    finalize(problem, g_hat, out);
    return out;
  }

  {
    double a_dd = 0.0, a_cd = 0.0, a_cc = 0.0;
    for (std::size_t i = 0; i < g_hat.size(); ++i) {
      const double d = problem.g_r[i] - problem.g_c[i];
      a_dd += d * d;
      a_cd += problem.g_c[i] * d;
      a_cc += problem.g_c[i] * problem.g_c[i];
    }
    geo.a_dd = a_dd;
    geo.a_cd = a_cd;
    geo.a_cc = a_cc;
  }

  // Worst objective at the ball center; the first outer step pushes h fully
  // toward it. If the other objective becomes the worse one, try the opposite
  // extreme, and only then search the interior where both are active.
  auto settled = [](double w_end, double q_end) { return w_end == 1.0 ? q_end <= 0.0 : q_end >= 0.0; };
  double w = geo.p_r <= geo.p_c ? 1.0 : 0.0;
  int iter = 1;
  double q = geo.gap(w);
  if (!settled(w, q) && iter < problem.max_iter) {
    const double w_first = w;
    const double q_first = q;
    ++iter;
    w = 1.0 - w_first;
    q = geo.gap(w);
    if (!settled(w, q)) {
      const double q0 = w_first == 0.0 ? q_first : q;
      const double q1 = w_first == 1.0 ? q_first : q;
      double lo = 0.0;
      double hi = 1.0;
      w = std::clamp(-q0 / (q1 - q0), 0.0, 1.0);
      if (!(w > lo && w < hi)) w = 0.5;
      const double scale =
          std::abs(geo.p_r) + std::abs(geo.p_c) + geo.radius * std::sqrt(geo.a_dd);
      const double tol = 8.0 * std::numeric_limits<double>::epsilon() * scale;
      while (iter < problem.max_iter) {
        ++iter;
        q = geo.gap(w);
        if (std::abs(q) <= tol) break;
        if (q > 0.0) {
          hi = w;
        } else {
          lo = w;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) break;
        const double curv = geo.curvature(w);
        double next = (curv > 0.0 && std::isfinite(curv)) ? w - q / curv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        w = next;
      }
    }
  }
  out.iterations_used = iter;
  assemble(problem, g_hat, geo.radius, w, out);
  finalize(problem, g_hat, out);
  if (out.worst_inner < std::min(geo.p_r, geo.p_c)) {
    // Iteration budget ran out short of the optimum; the center is feasible.
    out.h = g_hat;
    finalize(problem, g_hat, out);
  }
  return out;
}

DualOracleResult dual_oracle_solve(const HpiProblem& problem, std::size_t grid_points) {
  problem.validate();
  if (grid_points < 2) throw ConfigError("dual_oracle: need at least 2 grid points");
  const GradientVector g_hat =
      nominal_gradient(problem.g_r.span(), problem.g_c.span(), problem.lambda);
  const double g_hat_norm = norm(g_hat.span());
  const double radius = problem.rho * g_hat_norm;

  const double rr = dot(problem.g_r.span(), problem.g_r.span());
  const double cc = dot(problem.g_c.span(), problem.g_c.span());
  const double rc = dot(problem.g_r.span(), problem.g_c.span());
  const double r_hat = dot(problem.g_r.span(), g_hat.span());
  const double c_hat = dot(problem.g_c.span(), g_hat.span());

  DualOracleResult best;
  best.dual_value = std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(grid_points - 1);
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double w = static_cast<double>(k) / denom;
    const double v = 1.0 - w;
    const double norm_sq = w * w * rr + 2.0 * w * v * rc + v * v * cc;
    const double phi = w * r_hat + v * c_hat + radius * std::sqrt(std::max(norm_sq, 0.0));
    if (phi < best.dual_value) {
      best.dual_value = phi;
      best.w_star = w;
    }
  }

  const std::size_t n = g_hat.size();
  std::vector<double> g_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    g_w[i] = best.w_star * problem.g_r[i] + (1.0 - best.w_star) * problem.g_c[i];
  }
  const double gw_norm = norm(g_w);
  std::vector<double> h = g_hat.values();
  if (gw_norm > 0.0) {
    for (std::size_t i = 0; i < n; ++i) h[i] += radius * g_w[i] / gw_norm;
  }
  best.h = GradientVector(std::move(h));
  return best;
}

GradientVector dual_oracle(const HpiProblem& problem, std::size_t grid_points) {
  return dual_oracle_solve(problem, grid_points).h;
}

}  // namespace dsach::hpi
