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

#include <filesystem>
#include <map>
#include <stdexcept>

#include "dsach/errors.hpp"
#include "dsach/replay.hpp"
#include "dsach/rng.hpp"

using namespace dsach;
using namespace dsach::replay;

namespace {

Transition make(EventType e, double priority, double tag = 0.0) {
  Transition t;
  t.obs = {tag, 1.0};
  t.action = {0.5};
  t.next_obs = {tag + 1.0, 1.0};
  t.reward = tag;
  t.cost = 0.0;
  t.event = e;
  t.priority = priority;
  return t;
}

ReplayConfig no_floor(std::size_t global = 1000, std::size_t min_tier = 100) {
  ReplayConfig c;
  c.global_capacity = global;
  c.min_tier_capacity = min_tier;
  c.priority_floor = 0.0;
  return c;
}

}  // namespace

TEST_CASE("priority is the squared error") {
  CHECK(compute_priority(1.0, 1.0) == 0.0);
  CHECK(compute_priority(0.0, 2.0) == 4.0);
  CHECK(compute_priority(-1.5, 0.5) == 4.0);
}

TEST_CASE("event names round-trip") {
  for (auto e : {EventType::kCollision, EventType::kBraking, EventType::kOutOfArea, EventType::kNormal}) {
    CHECK(event_from_string(to_string(e)) == e);
  }
  CHECK_THROWS_AS(event_from_string("crash"), ConfigError);
}

TEST_CASE("sum tree prefix search") {
  SumTree t(5);
  const double v[] = {1.0, 0.0, 2.0, 0.5, 1.5};
  for (std::size_t i = 0; i < 5; ++i) t.set(i, v[i]);
  CHECK(t.total() == 5.0);
  CHECK(t.find(0.0) == 0);
  CHECK(t.find(0.999) == 0);
  CHECK(t.find(1.0) == 2);
  CHECK(t.find(3.2) == 3);
  CHECK(t.find(4.99) == 4);
  t.reserve(40);
  CHECK(t.total() == 5.0);
  CHECK(t.get(4) == 1.5);
}

TEST_CASE("push, size and capacity-one eviction") {
  HierarchicalBuffer b(no_floor(1, 1));
  b.push(make(EventType::kNormal, 1.0, 1.0));
  b.push(make(EventType::kNormal, 1.0, 2.0));
  CHECK(b.size() == 1);
  Rng rng(0);
  CHECK(b.sample(1, rng).items[0].reward == 2.0);
}

TEST_CASE("sampling an empty buffer throws") {
  HierarchicalBuffer b;
  Rng rng(0);
  CHECK_THROWS_AS(b.sample(4, rng), std::logic_error);
}

TEST_CASE("priority sums stay exact under random pushes and updates") {
  HierarchicalBuffer b(no_floor(2000, 200));
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const auto e = static_cast<EventType>(rng.index(kNumEventTypes));
    b.push(make(e, rng.uniform(0.0, 5.0), i));
    if (i % 100 == 0) {
      const auto batch = b.sample(32, rng);
      std::vector<double> p(batch.handles.size());
      for (auto& x : p) x = rng.uniform(0.0, 10.0);
      // Duplicate handles get the last value written, matching the audit.
      b.update_priorities(batch.handles, p);
      CHECK(b.audit() <= 1e-9);
    }
  }
  CHECK(b.audit() <= 1e-9);
  CHECK(b.size() <= 2000 + kNumEventTypes * 200);
}

TEST_CASE("single tier sampling is proportional within the tier") {
  HierarchicalBuffer b(no_floor());
  b.push(make(EventType::kNormal, 1.0, 0));
  b.push(make(EventType::kNormal, 3.0, 1));
  Rng rng(2);
  const int n = 100000;
  int ones = 0;
  for (const auto& t : b.sample(n, rng).items) ones += t.reward == 1.0;
  CHECK(std::abs(ones / double(n) - 0.75) < 0.01);
}

TEST_CASE("two-stage frequencies follow tier mass") {
  HierarchicalBuffer b(no_floor());
  for (int i = 0; i < 10; ++i) b.push(make(EventType::kCollision, 0.3, i));
  for (int i = 0; i < 10; ++i) b.push(make(EventType::kNormal, 0.1, i));
  Rng rng(3);
  const int n = 100000;
  int collision = 0;
  for (const auto& h : b.sample(n, rng).handles) collision += h.tier == EventType::kCollision;
  CHECK(std::abs(collision / double(n) - 0.75) < 0.02);
}

TEST_CASE("equal priorities sample uniformly") {
  HierarchicalBuffer b(no_floor());
  for (int i = 0; i < 20; ++i) b.push(make(EventType::kNormal, 1.0, i));
  Rng rng(4);
  const int n = 200000;
  std::map<double, int> counts;
  for (const auto& t : b.sample(n, rng).items) counts[t.reward] += 1;
  double chi2 = 0.0;
  const double expect = n / 20.0;
  for (const auto& [_, c] : counts) chi2 += (c - expect) * (c - expect) / expect;
  // 19 degrees of freedom; 43.8 is the 0.999 quantile.
  CHECK(chi2 < 43.8);
}

TEST_CASE("zero priority is never sampled") {
  HierarchicalBuffer b(no_floor());
  b.push(make(EventType::kNormal, 1.0, 0));
  b.push(make(EventType::kNormal, 1.0, 1));
  Rng rng(5);
  const auto first = b.sample(1, rng);
  const ReplayHandle zero = first.handles[0];
  const double zeroed_tag = first.items[0].reward;
  const std::vector<double> p{0.0};
  b.update_priorities(std::span(&zero, 1), p);
  for (const auto& t : b.sample(20000, rng).items) CHECK(t.reward != zeroed_tag);
}

TEST_CASE("stale handles are rejected") {
  HierarchicalBuffer b(no_floor(1, 1));
  b.push(make(EventType::kNormal, 1.0, 0));
  Rng rng(6);
  const auto h = b.sample(1, rng).handles[0];
  b.push(make(EventType::kNormal, 1.0, 1));
  const std::vector<double> p{2.0};
  CHECK_THROWS_AS(b.update_priorities(std::span(&h, 1), p), std::out_of_range);
  ReplayHandle bogus{EventType::kBraking, 99, 1};
  CHECK_THROWS_AS(b.update_priorities(std::span(&bogus, 1), p), std::out_of_range);
}

TEST_CASE("eviction is FIFO within a tier and never crosses tiers") {
  HierarchicalBuffer b(no_floor(4, 3));
  for (int i = 0; i < 3; ++i) b.push(make(EventType::kCollision, 1.0, 100 + i));
  for (int i = 0; i < 50; ++i) b.push(make(EventType::kNormal, 1.0, i));
  CHECK(b.tier_size(EventType::kCollision) == 3);
  Rng rng(7);
  double min_normal = 1e9;
  for (const auto& t : b.sample(5000, rng).items) {
    if (t.event == EventType::kNormal) min_normal = std::min(min_normal, t.reward);
  }
  CHECK(min_normal == 50.0 - b.tier_size(EventType::kNormal));
}

TEST_CASE("new transitions enter with the floor added and max priority tracked") {
  ReplayConfig c;
  c.priority_floor = 0.25;
  HierarchicalBuffer b(c);
  CHECK(b.max_priority() == 1.0);
  b.push(make(EventType::kBraking, 3.0));
  CHECK(b.tier_priority_sum(EventType::kBraking) == 3.25);
  CHECK(b.max_priority() == 3.0);
  CHECK_THROWS_AS(b.push(make(EventType::kNormal, -1.0)), ConfigError);
  auto neg = make(EventType::kNormal, 1.0);
  neg.cost = -0.5;
  CHECK_THROWS_AS(b.push(neg), ConfigError);
}

TEST_CASE("snapshot round trip") {
  HierarchicalBuffer b(no_floor(100, 10));
  Rng rng(8);
  for (int i = 0; i < 60; ++i) b.push(make(static_cast<EventType>(i % 4), rng.uniform(), i));
  const auto dir = std::filesystem::temp_directory_path() / "dsach_replay_snapshot";
  std::filesystem::create_directories(dir);
  b.save(dir / "buf");
  const auto c = HierarchicalBuffer::load(dir / "buf");
  CHECK(c.size() == b.size());
  CHECK(c.total_priority() == doctest::Approx(b.total_priority()).epsilon(1e-12));
  Rng r1(9), r2(9);
  const auto x = b.sample(50, r1);
  const auto y = c.sample(50, r2);
  for (std::size_t i = 0; i < 50; ++i) CHECK(x.items[i].reward == y.items[i].reward);
  std::filesystem::remove_all(dir);
}
