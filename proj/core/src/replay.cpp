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

#include "dsach/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "dsach/checkpoint.hpp"
#include "dsach/errors.hpp"

namespace dsach::replay {

std::string to_string(EventType e) {
  switch (e) {
    case EventType::kCollision:
      return "collision";
    case EventType::kBraking:
      return "braking";
    case EventType::kOutOfArea:
      return "out_of_area";
    case EventType::kNormal:
      return "normal";
  }
  return "normal";
}

EventType event_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kNumEventTypes; ++i) {
    auto e = static_cast<EventType>(i);
    if (to_string(e) == s) return e;
  }
  throw ConfigError("unknown event type '" + s + "'");
}

double compute_priority(double q_r_mean, double q_r_target) {
  const double d = q_r_mean - q_r_target;
  return d * d;
}

// --- SumTree ---------------------------------------------------------------

SumTree::SumTree(std::size_t capacity) {
  leaves_ = 1;
  while (leaves_ < std::max<std::size_t>(capacity, 1)) leaves_ <<= 1;
  tree_.assign(2 * leaves_, 0.0);
}

void SumTree::reserve(std::size_t capacity) {
  if (capacity <= leaves_) return;
  std::size_t n = leaves_;
  while (n < capacity) n <<= 1;
  std::vector<double> old(tree_.begin() + static_cast<std::ptrdiff_t>(leaves_), tree_.end());
  leaves_ = n;
  tree_.assign(2 * leaves_, 0.0);
  std::copy(old.begin(), old.end(), tree_.begin() + static_cast<std::ptrdiff_t>(leaves_));
  for (std::size_t i = leaves_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= leaves_) throw std::out_of_range("sum tree leaf out of range");
  std::size_t i = leaves_ + leaf;
  tree_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const std::size_t left = 2 * node;
    if (mass < tree_[left] || tree_[left + 1] <= 0.0) {
      node = left;
    } else {
      mass -= tree_[left];
      node = left + 1;
    }
  }
  return node - leaves_;
}

// --- HierarchicalBuffer ----------------------------------------------------

HierarchicalBuffer::HierarchicalBuffer(ReplayConfig config) : config_(config) {
  if (config_.global_capacity == 0 || config_.min_tier_capacity == 0) {
    throw ConfigError("replay: capacities must be positive");
  }
  if (!(config_.priority_floor >= 0.0)) throw ConfigError("replay: priority floor must be >= 0");
}

std::size_t HierarchicalBuffer::tier_capacity(EventType e) const {
  const auto& tier = tiers_[idx(e)];
  if (total_pushes_ == 0) return config_.min_tier_capacity;
  const double share = static_cast<double>(tier.pushes) / static_cast<double>(total_pushes_);
  const auto proportional =
      static_cast<std::size_t>(share * static_cast<double>(config_.global_capacity));
  return std::max(config_.min_tier_capacity, proportional);
}

void HierarchicalBuffer::evict_oldest(Tier& tier) {
  const std::uint32_t s = tier.order.front();
  tier.order.pop_front();
  tier.slots[s].live = false;
  tier.slots[s].item = Transition{};
  tier.tree.set(s, 0.0);
  tier.free.push_back(s);
}

void HierarchicalBuffer::push(Transition t) {
  if (!(t.cost >= 0.0)) throw ConfigError("replay: transition cost must be nonnegative");
  if (!std::isfinite(t.priority) || t.priority < 0.0) {
    throw ConfigError("replay: transition priority must be finite and >= 0");
  }
  tiers_[idx(t.event)].pushes += 1;
  total_pushes_ += 1;
  insert(std::move(t));
}

void HierarchicalBuffer::insert(Transition t) {
  auto& tier = tiers_[idx(t.event)];
  const std::size_t cap = tier_capacity(t.event);
  while (tier.order.size() >= cap) evict_oldest(tier);

  std::uint32_t s;
  if (!tier.free.empty()) {
    s = tier.free.back();
    tier.free.pop_back();
  } else {
    s = static_cast<std::uint32_t>(tier.slots.size());
    tier.slots.emplace_back();
    tier.tree.reserve(tier.slots.size());
  }
  max_priority_ = std::max(max_priority_, t.priority);
  const double stored = t.priority + config_.priority_floor;
  tier.slots[s].item = std::move(t);
  tier.slots[s].generation = next_generation_++;
  tier.slots[s].live = true;
  tier.order.push_back(s);
  tier.tree.set(s, stored);
}

std::size_t HierarchicalBuffer::size() const {
  std::size_t n = 0;
  for (const auto& t : tiers_) n += t.order.size();
  return n;
}

double HierarchicalBuffer::total_priority() const {
  double s = 0.0;
  for (const auto& t : tiers_) s += t.tree.total();
  return s;
}

ReplayBatch HierarchicalBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (size() == 0) throw std::logic_error("replay: cannot sample from an empty buffer");
  std::array<double, kNumEventTypes> mass{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumEventTypes; ++i) {
    mass[i] = tiers_[i].order.empty() ? 0.0 : tiers_[i].tree.total();
    total += mass[i];
  }
  ReplayBatch batch;
  batch.handles.reserve(batch_size);
  batch.items.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    std::size_t tier_idx = kNumEventTypes;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < kNumEventTypes; ++i) {
        if (mass[i] <= 0.0) continue;
        tier_idx = i;
        if (u < mass[i]) break;
        u -= mass[i];
      }
    } else {
      // Every stored priority is zero: fall back to uniform over entries.
      auto k = rng.index(size());
      for (std::size_t i = 0; i < kNumEventTypes; ++i) {
        if (k < tiers_[i].order.size()) {
          tier_idx = i;
          break;
        }
        k -= tiers_[i].order.size();
      }
    }
    const auto& tier = tiers_[tier_idx];
    std::uint32_t slot;
    if (tier.tree.total() > 0.0) {
      slot = static_cast<std::uint32_t>(tier.tree.find(rng.uniform() * tier.tree.total()));
    } else {
      slot = tier.order[rng.index(tier.order.size())];
    }
    const auto& s = tier.slots[slot];
    batch.handles.push_back({static_cast<EventType>(tier_idx), slot, s.generation});
    batch.items.push_back(s.item);
  }
  return batch;
}

const HierarchicalBuffer::Slot& HierarchicalBuffer::slot_at(const ReplayHandle& h) const {
  const auto& tier = tiers_[idx(h.tier)];
  if (h.slot >= tier.slots.size()) throw std::out_of_range("replay: unknown handle");
  const auto& s = tier.slots[h.slot];
  if (!s.live || s.generation != h.generation) {
    throw std::out_of_range("replay: stale handle (slot was evicted or overwritten)");
  }
  return s;
}

void HierarchicalBuffer::update_priorities(std::span<const ReplayHandle> handles,
                                           std::span<const double> raw) {
  if (handles.size() != raw.size()) throw ConfigError("replay: handle/priority count mismatch");
  for (const auto& h : handles) slot_at(h);
  for (std::size_t i = 0; i < handles.size(); ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0) {
      throw ConfigError("replay: priorities must be finite and >= 0");
    }
    auto& tier = tiers_[idx(handles[i].tier)];
    tier.slots[handles[i].slot].item.priority = raw[i];
    tier.tree.set(handles[i].slot, raw[i] + config_.priority_floor);
    max_priority_ = std::max(max_priority_, raw[i]);
  }
}

double HierarchicalBuffer::audit() const {
  double worst = 0.0;
  double brute_total = 0.0;
  for (const auto& tier : tiers_) {
    double brute = 0.0;
    for (auto s : tier.order) brute += tier.slots[s].item.priority + config_.priority_floor;
    worst = std::max(worst, std::abs(brute - tier.tree.total()));
    brute_total += brute;
  }
  worst = std::max(worst, std::abs(brute_total - total_priority()));
  return worst;
}

void HierarchicalBuffer::save(const std::filesystem::path& stem) const {
  std::size_t obs_dim = 0, act_dim = 0;
  for (const auto& tier : tiers_) {
    if (!tier.order.empty()) {
      const auto& t = tier.slots[tier.order.front()].item;
      obs_dim = t.obs.size();
      act_dim = t.action.size();
      break;
    }
  }
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  auto bin_path = stem;
  bin_path += ".bin";
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw ConfigError("cannot write " + bin_path.string());
  nlohmann::json header;
  header["format"] = "dsach-replay";
  header["version"] = 1;
  header["obs_dim"] = obs_dim;
  header["act_dim"] = act_dim;
  header["global_capacity"] = config_.global_capacity;
  header["min_tier_capacity"] = config_.min_tier_capacity;
  header["priority_floor"] = config_.priority_floor;
  header["max_priority"] = max_priority_;
  header["record_layout"] = "obs, action, reward, cost, next_obs, done, event, priority";
  for (std::size_t i = 0; i < kNumEventTypes; ++i) {
    const auto& tier = tiers_[i];
    const auto name = to_string(static_cast<EventType>(i));
    header["tiers"][name] = {{"count", tier.order.size()}, {"pushes", tier.pushes}};
    for (auto s : tier.order) {
      const auto& t = tier.slots[s].item;
      std::vector<double> rec;
      rec.reserve(2 * obs_dim + act_dim + 5);
      rec.insert(rec.end(), t.obs.begin(), t.obs.end());
      rec.insert(rec.end(), t.action.begin(), t.action.end());
      rec.push_back(t.reward);
      rec.push_back(t.cost);
      rec.insert(rec.end(), t.next_obs.begin(), t.next_obs.end());
      rec.push_back(t.done ? 1.0 : 0.0);
      rec.push_back(static_cast<double>(i));
      rec.push_back(t.priority);
      if (rec.size() != 2 * obs_dim + act_dim + 5) {
        throw ConfigError("replay snapshot: transitions have inconsistent dimensions");
      }
      nn::write_le_doubles(bin, rec);
    }
  }
  auto js_path = stem;
  js_path += ".json";
  std::ofstream js(js_path, std::ios::trunc);
  js << header.dump(2) << '\n';
}

HierarchicalBuffer HierarchicalBuffer::load(const std::filesystem::path& stem) {
  auto js_path = stem;
  js_path += ".json";
  std::ifstream js(js_path);
  if (!js) throw ConfigError("cannot open " + js_path.string());
  nlohmann::json header;
  try {
    js >> header;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed replay header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "dsach-replay") throw ConfigError("not a replay snapshot");
  ReplayConfig cfg;
  cfg.global_capacity = header.at("global_capacity");
  cfg.min_tier_capacity = header.at("min_tier_capacity");
  cfg.priority_floor = header.at("priority_floor");
  HierarchicalBuffer buf(cfg);
  const std::size_t obs_dim = header.at("obs_dim");
  const std::size_t act_dim = header.at("act_dim");
  auto bin_path = stem;
  bin_path += ".bin";
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw ConfigError("cannot open " + bin_path.string());
  const std::size_t rec_len = 2 * obs_dim + act_dim + 5;
  // Push statistics first, so tier capacities match the saved buffer.
  for (std::size_t i = 0; i < kNumEventTypes; ++i) {
    const auto name = to_string(static_cast<EventType>(i));
    buf.tiers_[i].pushes = header.at("tiers").at(name).at("pushes");
    buf.total_pushes_ += buf.tiers_[i].pushes;
  }
  for (std::size_t i = 0; i < kNumEventTypes; ++i) {
    const auto name = to_string(static_cast<EventType>(i));
    const std::size_t count = header.at("tiers").at(name).at("count");
    for (std::size_t k = 0; k < count; ++k) {
      auto rec = nn::read_le_doubles(bin, rec_len);
      Transition t;
      auto it = rec.begin();
      t.obs.assign(it, it + static_cast<std::ptrdiff_t>(obs_dim));
      it += static_cast<std::ptrdiff_t>(obs_dim);
      t.action.assign(it, it + static_cast<std::ptrdiff_t>(act_dim));
      it += static_cast<std::ptrdiff_t>(act_dim);
      t.reward = *it++;
      t.cost = *it++;
      t.next_obs.assign(it, it + static_cast<std::ptrdiff_t>(obs_dim));
      it += static_cast<std::ptrdiff_t>(obs_dim);
      t.done = *it++ != 0.0;
      t.event = static_cast<EventType>(static_cast<int>(*it++));
      t.priority = *it++;
      buf.insert(std::move(t));
    }
  }
  buf.max_priority_ = header.at("max_priority");
  return buf;
}

}  // namespace dsach::replay
