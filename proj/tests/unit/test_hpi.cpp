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

#include <algorithm>
#include <cmath>
#include <vector>

#include "dsach/errors.hpp"
#include "dsach/hpi.hpp"
#include "dsach/rng.hpp"

using namespace dsach;
using namespace dsach::hpi;
using nn::dot;
using nn::norm;

namespace {

GradientVector vec(std::vector<double> v) { return GradientVector(std::move(v)); }

GradientVector random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return vec(std::move(v));
}

HpiProblem problem(GradientVector g_r, GradientVector g_c, double lambda, double rho) {
  HpiProblem p;
  p.g_r = std::move(g_r);
  p.g_c = std::move(g_c);
  p.lambda = lambda;
  p.rho = rho;
  return p;
}

double worst(const HpiProblem& p, std::span<const double> h) {
  return std::min(dot(p.g_r.span(), h), dot(p.g_c.span(), h));
}

// Projected supergradient ascent on the primal: a third, slow route to the
// optimum that shares no code with either solver.
double supergradient_ascent(const HpiProblem& p, int iters) {
  const std::size_t n = p.g_r.size();
  const auto g_hat = nominal_gradient(p.g_r.span(), p.g_c.span(), p.lambda);
  const double radius = p.rho * norm(g_hat.span());
  std::vector<double> h = g_hat.values();
  double best = worst(p, h);
  const double scale = std::max(norm(p.g_r.span()), norm(p.g_c.span()));
  for (int k = 1; k <= iters; ++k) {
    const bool r_active = dot(p.g_r.span(), h) <= dot(p.g_c.span(), h);
    const auto& g = r_active ? p.g_r : p.g_c;
    const double step = radius / (scale * std::sqrt(static_cast<double>(k)));
    for (std::size_t i = 0; i < n; ++i) h[i] += step * g[i];
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (h[i] - g_hat[i]) * (h[i] - g_hat[i]);
    dist = std::sqrt(dist);
    if (dist > radius) {
      for (std::size_t i = 0; i < n; ++i) h[i] = g_hat[i] + (h[i] - g_hat[i]) * radius / dist;
    }
    best = std::max(best, worst(p, h));
  }
  return best;
}

}  // namespace

TEST_CASE("nominal gradient") {
  CHECK(nominal_gradient(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 1.0).values() ==
        std::vector<double>{1, 1});
  CHECK(nominal_gradient(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 2.0).values() ==
        std::vector<double>{1, 2});
  CHECK(nominal_gradient(std::vector<double>{3, 4}, std::vector<double>{-7, 9}, 0.0).values() ==
        std::vector<double>{3, 4});
  CHECK_THROWS_AS(nominal_gradient(std::vector<double>{1}, std::vector<double>{1, 2}, 1.0),
                  ConfigError);
}

TEST_CASE("conflict detection") {
  CHECK(detect_conflict(std::vector<double>{1, 0}, std::vector<double>{-1, 0.1}).conflict);
  CHECK_FALSE(detect_conflict(std::vector<double>{1, 0}, std::vector<double>{0, 1}).conflict);
  CHECK_FALSE(detect_conflict(std::vector<double>{1, 2}, std::vector<double>{2, 4}).conflict);
  CHECK(detect_conflict(std::vector<double>{1, 2}, std::vector<double>{2, 4}).inner == 10.0);
}

TEST_CASE("rho = 0 returns the nominal gradient exactly") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    auto p = problem(random_vec(9, rng), random_vec(9, rng), 0.7, 0.0);
    const auto s = solve_harmonic(p);
    CHECK(s.h.values() == nominal_gradient(p.g_r.span(), p.g_c.span(), 0.7).values());
  }
}

TEST_CASE("aligned gradients scale the nominal gradient by (1 + rho)") {
  const auto s = solve_harmonic(problem(vec({1, 0}), vec({1, 0}), 1.0, 0.5));
  CHECK(s.h[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(s.h[1]) < 1e-12);
  const auto o = dual_oracle(problem(vec({1, 0}), vec({1, 0}), 1.0, 0.5), 1001);
  CHECK(o[0] == doctest::Approx(3.0).epsilon(1e-9));

  // g_r = g_c = g gives (1 + lambda)(1 + rho) g.
  Rng rng(4);
  const auto g = random_vec(6, rng);
  const auto q = dual_oracle(problem(g, g, 2.0, 0.9), 101);
  for (std::size_t i = 0; i < 6; ++i) CHECK(q[i] == doctest::Approx(3.0 * 1.9 * g[i]).epsilon(1e-9));
}

TEST_CASE("degenerate nominal gradient gives h = 0") {
  const auto s = solve_harmonic(problem(vec({1, -2}), vec({-1, 2}), 1.0, 0.9));
  CHECK(s.degenerate);
  CHECK(norm(s.h.span()) == 0.0);
}

TEST_CASE("conflicting fixture: equalized inner products at w = 1/2") {
  const auto p = problem(vec({1, 0}), vec({-0.6, 0.8}), 1.0, 0.9);
  const auto s = solve_harmonic(p);
  CHECK_FALSE(s.degenerate);
  CHECK(s.w_star == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.h[0] == doctest::Approx(0.76).epsilon(1e-12));
  CHECK(s.h[1] == doctest::Approx(1.52).epsilon(1e-12));
  CHECK(s.inner_r == doctest::Approx(s.inner_c).epsilon(1e-12));
  CHECK(s.feasibility_slack >= -1e-12);

  const auto o = dual_oracle_solve(p, 100001);
  CHECK(o.w_star == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(o.h[0] == doctest::Approx(0.76).epsilon(1e-6));
  CHECK(o.h[1] == doctest::Approx(1.52).epsilon(1e-6));
  CHECK(o.dual_value == doctest::Approx(s.worst_inner).epsilon(1e-9));
}

TEST_CASE("lambda = 0 centers the ball on g_r") {
  const auto p = problem(vec({2, 1}), vec({-1, 3}), 0.0, 0.5);
  const auto s = solve_harmonic(p);
  const double dist = std::hypot(s.h[0] - 2.0, s.h[1] - 1.0);
  CHECK(dist <= 0.5 * std::hypot(2.0, 1.0) + 1e-12);
}

TEST_CASE("random instances agree with the dual oracle and a supergradient ascent") {
  Rng rng(17);
  for (const std::size_t n : {2, 8, 64, 512}) {
    for (int t = 0; t < 10; ++t) {
      auto p = problem(random_vec(n, rng), random_vec(n, rng), rng.uniform(0.25, 3.0),
                       rng.uniform(0.0, 0.95));
      const auto s = solve_harmonic(p);
      const auto o = dual_oracle_solve(p, 20001);
      const auto g_hat = nominal_gradient(p.g_r.span(), p.g_c.span(), p.lambda);
      const double scale = 1.0 + dot(g_hat.span(), g_hat.span());
      CHECK(s.iterations_used <= p.max_iter);
      // Strong duality: the primal optimum equals the dual minimum.
      CHECK(std::abs(s.worst_inner - o.dual_value) <= 1e-6 * scale);
      if (n <= 8) {
        const double ascent = supergradient_ascent(p, 200000);
        CHECK(ascent <= s.worst_inner + 1e-9 * scale);
        CHECK(s.worst_inner - ascent <= 1e-3 * scale);
      }
    }
  }
}

TEST_CASE("invariants: feasibility, no regression, conflict mitigation") {
  Rng rng(23);
  int conflicts = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.index(30);
    auto p = problem(random_vec(n, rng), random_vec(n, rng), rng.uniform(0.1, 4.0),
                     rng.uniform(0.0, 0.99));
    const auto s = solve_harmonic(p);
    const auto g_hat = nominal_gradient(p.g_r.span(), p.g_c.span(), p.lambda);
    const double gn = norm(g_hat.span());
    const double tol = 1e-9 * (1.0 + gn * gn);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = s.h[i] - g_hat[i];
    CHECK(norm(diff) <= p.rho * gn + tol);
    CHECK(s.worst_inner >= worst(p, g_hat.span()) - tol);
    if (detect_conflict(p.g_r.span(), p.g_c.span()).conflict && p.rho > 0.05) {
      ++conflicts;
      CHECK(s.worst_inner > worst(p, g_hat.span()));
    }
  }
  CHECK(conflicts > 50);
}

TEST_CASE("scale equivariance") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    auto p = problem(random_vec(7, rng), random_vec(7, rng), 1.3, 0.6);
    const auto base = solve_harmonic(p);
    for (const double s : {0.5, 2.0, 8.0, 3.7}) {
      auto q = p;
      for (std::size_t i = 0; i < 7; ++i) {
        q.g_r[i] *= s;
        q.g_c[i] *= s;
      }
      const auto scaled = solve_harmonic(q);
      for (std::size_t i = 0; i < 7; ++i) {
        CHECK(scaled.h[i] == doctest::Approx(s * base.h[i]).epsilon(1e-10).scale(s * norm(base.h.span())));
      }
    }
  }
}

TEST_CASE("precondition violations") {
  CHECK_THROWS_AS(solve_harmonic(problem(vec({1, 0}), vec({1}), 1.0, 0.5)), ConfigError);
  CHECK_THROWS_AS(solve_harmonic(problem(vec({NAN, 0}), vec({1, 0}), 1.0, 0.5)), NumericalError);
  CHECK_THROWS_AS(solve_harmonic(problem(vec({1, 0}), vec({1, INFINITY}), 1.0, 0.5)),
                  NumericalError);
  CHECK_THROWS_AS(solve_harmonic(problem(vec({1, 0}), vec({0, 1}), 1.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(solve_harmonic(problem(vec({1, 0}), vec({0, 1}), -1.0, 0.5)), ConfigError);
  CHECK_THROWS_AS(dual_oracle(problem(vec({1, 0}), vec({0, 1}), 1.0, 0.5), 1), ConfigError);
}
