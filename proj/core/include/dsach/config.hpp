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
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>

#include "dsach/agent.hpp"
#include "dsach/env.hpp"
#include "dsach/multilane.hpp"
#include "dsach/replay.hpp"
#include "dsach/toy.hpp"

namespace dsach::harness {

/// Everything needed to reproduce a run. Defaults carry the reference
/// training and reward/cost hyper-parameters; `iterations` is usually
/// overridden for desk-scale runs.
struct RunConfig {
  std::string env = "multilane";
  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";
  std::int64_t iterations = 200'000;
  int sample_batch = 20;
  int replay_batch = 256;
  int eval_episodes = 50;
  /// Base seed of held-out evaluation scenarios.
  std::uint64_t eval_seed = 1'000'003;
  int rolling_every = 1000;
  int rolling_window = 100;
  /// Re-selects the multilane reference lane from the critics every N steps
  /// during evaluation (0 keeps the sampled reference).
  int eval_reselect_every = 10;
  bool trajectory_logs = true;
  agent::AgentConfig agent;
  replay::ReplayConfig replay;
  env::MultilaneConfig multilane;
  env::ToyConfig toy;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Overlays `j` on the defaults. Unknown keys and out-of-range values raise
/// ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

std::unique_ptr<env::Environment> make_env(const RunConfig& c);

}  // namespace dsach::harness
