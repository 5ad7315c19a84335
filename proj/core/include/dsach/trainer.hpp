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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsach/agent.hpp"
#include "dsach/env.hpp"
#include "dsach/replay.hpp"

namespace dsach::train {

using agent::Agent;
using env::Environment;
using env::EventType;

enum class Outcome { kArrived, kCollision, kOutOfArea, kTimeout };

std::string to_string(Outcome o);

struct EpisodeSummary {
  std::uint64_t index = 0;
  double ret = 0.0;
  double cost = 0.0;
  int length = 0;
  Outcome outcome = Outcome::kTimeout;
  bool arrived() const { return outcome == Outcome::kArrived; }
  bool collision() const { return outcome == Outcome::kCollision; }
  bool out_of_area() const { return outcome == Outcome::kOutOfArea; }
};

/// Outcome of a finished episode from its last step.
Outcome classify(const env::StepResult& last);

/// Steps one environment with the current stochastic policy and feeds the
/// replay buffer. Episodes continue across collect() calls.
class EnvSampler {
 public:
  EnvSampler(Environment& env, Rng rng);

  /// Collects n transitions. New transitions enter the buffer at its current
  /// maximum priority. Returns the episodes that finished during the call.
  std::vector<EpisodeSummary> collect(const Agent& agent, replay::HierarchicalBuffer& buffer, int n);

  std::uint64_t episodes_done() const { return episodes_done_; }
  std::uint64_t env_steps() const { return env_steps_; }

 private:
  void start_episode();

  Environment* env_;
  Rng rng_;
  std::vector<double> obs_;
  bool active_ = false;
  double ret_ = 0.0;
  double cost_ = 0.0;
  int length_ = 0;
  std::uint64_t episodes_done_ = 0;
  std::uint64_t env_steps_ = 0;
};

struct TrainSchedule {
  int sample_batch = 20;
  int replay_batch = 256;
};

struct StepMetrics {
  std::uint64_t step = 0;
  bool updated = false;
  double reward_critic_loss = 0.0;
  double cost_critic_loss = 0.0;
  double actor_worst_inner = 0.0;
  double grad_inner_product = 0.0;
  double alpha = 0.0;
  double mean_q_r = 0.0;
  double mean_q_c = 0.0;
  std::uint64_t episodes_done = 0;
  std::vector<EpisodeSummary> finished;
};

/// One training iteration: collect sample_batch transitions, then, once the
/// buffer holds replay_batch items, run one agent update on a prioritized
/// batch and refresh the sampled priorities. Actor diagnostics carry over
/// from the most recent actor update.
StepMetrics train_step(Agent& agent, replay::HierarchicalBuffer& buffer, EnvSampler& sampler,
                       const TrainSchedule& schedule, Rng& rng, std::uint64_t step,
                       const StepMetrics* previous = nullptr);

using Policy = std::function<std::vector<double>(std::span<const double> obs)>;
using StepHook = std::function<void(Environment& env, int step)>;

/// Runs one episode with the given policy. When `trajectory` is set, it
/// receives the reset row followed by one row per step.
EpisodeSummary run_episode(Environment& env, Rng& rng, const Policy& policy,
                           std::vector<env::TrajectoryRow>* trajectory = nullptr,
                           const StepHook& before_step = {});

}  // namespace dsach::train
