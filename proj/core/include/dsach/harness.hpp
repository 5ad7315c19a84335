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
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "dsach/agent.hpp"
#include "dsach/config.hpp"
#include "dsach/trainer.hpp"

namespace dsach::harness {

using train::EpisodeSummary;

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& metrics_columns();
const std::vector<std::string>& rolling_columns();
const std::vector<std::string>& episode_columns();
/// Column lists of every CSV the harness writes, with the schema version.
nlohmann::json schemas();

struct RollingStats {
  std::uint64_t step = 0;
  std::uint64_t episodes_done = 0;
  std::size_t window = 0;
  double arrival_rate = 0.0;
  double collision_rate = 0.0;
  double out_of_area_rate = 0.0;
  double mean_return = 0.0;
  double mean_cost = 0.0;
};

/// Statistics over the last `window` entries of `episodes`.
RollingStats rolling_stats(const std::vector<EpisodeSummary>& episodes, std::size_t window);

struct TrainResult {
  std::filesystem::path out_dir;
  std::filesystem::path checkpoint;
  std::vector<EpisodeSummary> episodes;
  RollingStats final_rolling;
  double seconds = 0.0;
};

/// Trains for config.iterations steps and writes resolved_config.json,
/// metrics.csv, rolling.csv, episodes.csv, schemas.json, run_info.json and
/// checkpoint/agent.{bin,json} under config.out_dir. Progress lines go to
/// `log` when set.
TrainResult cmd_train(const RunConfig& config, std::ostream* log = nullptr);

struct EvalResult {
  std::vector<EpisodeSummary> episodes;
  double arrival_rate = 0.0;
  double collision_rate = 0.0;
  double out_of_area_rate = 0.0;
  double mean_return = 0.0;
  double mean_cost = 0.0;
  int collisions = 0;
};

EvalResult summarize(std::vector<EpisodeSummary> episodes);

/// Rolls out `policy` for `episodes` episodes; episode i resets from
/// Rng(seed + i). Writes eval_episodes.csv, eval_summary.json and (optionally)
/// per-episode trajectory CSVs when `out_dir` is set.
EvalResult evaluate_policy(env::Environment& env, const train::Policy& policy, int episodes,
                           std::uint64_t seed, const std::filesystem::path* out_dir = nullptr,
                           bool trajectories = false, const train::StepHook& hook = {});

/// Deterministic (mean-action) evaluation of an agent under `config`.
EvalResult evaluate_agent(const agent::Agent& agent, const RunConfig& config, int episodes,
                          std::uint64_t seed, const std::filesystem::path* out_dir = nullptr);

/// Loads a checkpoint (run directory, checkpoint directory or file stem) and
/// its run's resolved configuration, then evaluates on held-out seeds.
EvalResult cmd_eval(const std::filesystem::path& ckpt, int episodes,
                    const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed = {});

/// Solves the harmonic problem described by {g_r, g_c, lambda, rho, max_iter}.
/// Malformed input raises ConfigError.
nlohmann::json cmd_hpi_solve(const nlohmann::json& in);

}  // namespace dsach::harness
