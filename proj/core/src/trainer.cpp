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

#include "dsach/trainer.hpp"

#include "dsach/errors.hpp"

namespace dsach::train {

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kArrived:
      return "arrived";
    case Outcome::kCollision:
      return "collision";
    case Outcome::kOutOfArea:
      return "out_of_area";
    case Outcome::kTimeout:
      return "timeout";
  }
  return "timeout";
}

Outcome classify(const env::StepResult& last) {
  if (last.terminal && last.event == EventType::kCollision) return Outcome::kCollision;
  if (last.terminal && last.event == EventType::kOutOfArea) return Outcome::kOutOfArea;
  if (last.arrived) return Outcome::kArrived;
  return Outcome::kTimeout;
}

EnvSampler::EnvSampler(Environment& env, Rng rng) : env_(&env), rng_(rng) {}

void EnvSampler::start_episode() {
  obs_ = env_->reset(rng_);
  active_ = true;
  ret_ = 0.0;
  cost_ = 0.0;
  length_ = 0;
}

std::vector<EpisodeSummary> EnvSampler::collect(const Agent& agent,
                                                replay::HierarchicalBuffer& buffer, int n) {
  std::vector<EpisodeSummary> finished;
  for (int k = 0; k < n; ++k) {
    if (!active_) start_episode();
    auto action = agent.act(obs_, rng_, false);
    auto res = env_->step(action);
    ++env_steps_;
    ret_ += res.reward;
    cost_ += res.cost;
    ++length_;

    replay::Transition t;
    t.obs = obs_;
    t.action = std::move(action);
    t.reward = res.reward;
    t.cost = res.cost;
    t.next_obs = res.obs;
    t.done = res.terminal;
    t.event = res.event;
    t.priority = buffer.max_priority();
    buffer.push(std::move(t));

    obs_ = std::move(res.obs);
    if (res.episode_over()) {
      finished.push_back({episodes_done_, ret_, cost_, length_, classify(res)});
      ++episodes_done_;
      active_ = false;
    }
  }
  return finished;
}

StepMetrics train_step(Agent& agent, replay::HierarchicalBuffer& buffer, EnvSampler& sampler,
                       const TrainSchedule& schedule, Rng& rng, std::uint64_t step,
                       const StepMetrics* previous) {
  if (schedule.sample_batch < 1 || schedule.replay_batch < 1) {
    throw ConfigError("train_step: batch sizes must be positive");
  }
  StepMetrics m;
  m.step = step;
  if (previous) {
    m.actor_worst_inner = previous->actor_worst_inner;
    m.grad_inner_product = previous->grad_inner_product;
  }
  m.finished = sampler.collect(agent, buffer, schedule.sample_batch);
  m.episodes_done = sampler.episodes_done();
  m.alpha = agent.alpha();
  if (buffer.size() < static_cast<std::size_t>(schedule.replay_batch)) return m;

  const auto batch = buffer.sample(static_cast<std::size_t>(schedule.replay_batch), rng);
  const auto b = agent.make_batch(batch.items);
  const auto u = agent.train_on_batch(b, rng);
  buffer.update_priorities(batch.handles, u.priorities);

  m.updated = true;
  m.reward_critic_loss = u.reward_critic_loss;
  m.cost_critic_loss = u.cost_critic_loss;
  m.mean_q_r = u.mean_q_r;
  m.mean_q_c = u.mean_q_c;
  m.alpha = u.alpha;
  if (u.actor_updated) {
    m.actor_worst_inner = u.actor.worst_inner;
    m.grad_inner_product = u.actor.grad_inner;
  }
  return m;
}

EpisodeSummary run_episode(Environment& env, Rng& rng, const Policy& policy,
                           std::vector<env::TrajectoryRow>* trajectory, const StepHook& before_step) {
  auto obs = env.reset(rng);
  if (trajectory) trajectory->push_back(env.trajectory_row());
  EpisodeSummary s;
  for (int k = 0;; ++k) {
    if (before_step) {
      before_step(env, k);
      obs = env.observe();
    }
    const auto a = policy(obs);
    auto res = env.step(a);
    s.ret += res.reward;
    s.cost += res.cost;
    ++s.length;
    if (trajectory) trajectory->push_back(env.trajectory_row());
    obs = std::move(res.obs);
    if (res.episode_over()) {
      s.outcome = classify(res);
      return s;
    }
  }
}

}  // namespace dsach::train
