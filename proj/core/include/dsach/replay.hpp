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
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dsach/rng.hpp"

namespace dsach::replay {

enum class EventType : std::uint8_t { kCollision = 0, kBraking = 1, kOutOfArea = 2, kNormal = 3 };
inline constexpr std::size_t kNumEventTypes = 4;

std::string to_string(EventType e);
EventType event_from_string(const std::string& s);

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  double cost = 0.0;
  std::vector<double> next_obs;
  bool done = false;
  EventType event = EventType::kNormal;
  /// Raw importance (before the floor is added).
  double priority = 0.0;
};

/// (Q_r mean - Q_r target)^2
double compute_priority(double q_r_mean, double q_r_target);

/// Binary sum tree over a growable set of leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity = 1);

  std::size_t capacity() const { return leaves_; }
  /// Grows the leaf count to at least `capacity`, keeping existing values.
  void reserve(std::size_t capacity);
  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return tree_[leaves_ + leaf]; }
  double total() const { return tree_[1]; }
  /// Leaf i such that prefix(i) <= mass < prefix(i + 1), for mass in [0, total).
  std::size_t find(double mass) const;

 private:
  std::size_t leaves_ = 1;
  std::vector<double> tree_;
};

struct ReplayConfig {
  std::size_t global_capacity = 1'000'000;
  std::size_t min_tier_capacity = 10'000;
  double priority_floor = 1e-3;
};

/// Identifies a stored transition; `generation` detects slots that were
/// overwritten after the handle was issued.
struct ReplayHandle {
  EventType tier = EventType::kNormal;
  std::uint32_t slot = 0;
  std::uint64_t generation = 0;
};

struct ReplayBatch {
  std::vector<ReplayHandle> handles;
  std::vector<Transition> items;
};

/// Event-typed prioritized replay. Each event type owns a FIFO tier with its
/// own sum tree; sampling first draws a tier in proportion to its priority
/// mass, then a transition within the tier in proportion to its priority.
///
/// Tier capacity is max(min_tier_capacity, global_capacity * observed share of
/// pushes for that event type). Overflow evicts the oldest entry of the tier
/// being pushed into, so the total may exceed global_capacity by at most
/// kNumEventTypes * min_tier_capacity while shares settle.
class HierarchicalBuffer {
 public:
  explicit HierarchicalBuffer(ReplayConfig config = {});

  const ReplayConfig& config() const { return config_; }

  void push(Transition t);
  ReplayBatch sample(std::size_t batch_size, Rng& rng) const;
  /// Throws std::out_of_range on a stale or unknown handle.
  void update_priorities(std::span<const ReplayHandle> handles, std::span<const double> raw);

  std::size_t size() const;
  std::size_t tier_size(EventType e) const { return tiers_[idx(e)].order.size(); }
  std::size_t tier_capacity(EventType e) const;
  double tier_priority_sum(EventType e) const { return tiers_[idx(e)].tree.total(); }
  double total_priority() const;
  /// Largest raw priority ever stored (1 before the first push).
  double max_priority() const { return max_priority_; }
  std::uint64_t pushes(EventType e) const { return tiers_[idx(e)].pushes; }

  /// Largest absolute difference between maintained sums and a brute-force
  /// recomputation, over tier sums and the total.
  double audit() const;

  /// Snapshot: <stem>.bin with transitions, <stem>.json header.
  void save(const std::filesystem::path& stem) const;
  static HierarchicalBuffer load(const std::filesystem::path& stem);

 private:
  struct Slot {
    Transition item;
    std::uint64_t generation = 0;
    bool live = false;
  };
  struct Tier {
    std::vector<Slot> slots;
    std::deque<std::uint32_t> order;  // oldest first
    std::vector<std::uint32_t> free;
    SumTree tree;
    std::uint64_t pushes = 0;
  };

  static std::size_t idx(EventType e) { return static_cast<std::size_t>(e); }
  const Slot& slot_at(const ReplayHandle& h) const;
  void evict_oldest(Tier& tier);
  void insert(Transition t);

  ReplayConfig config_;
  std::array<Tier, kNumEventTypes> tiers_;
  std::uint64_t total_pushes_ = 0;
  std::uint64_t next_generation_ = 1;
  double max_priority_ = 1.0;
};

}  // namespace dsach::replay
