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

#include "dsach/config.hpp"

#include <fstream>

#include "dsach/errors.hpp"

namespace dsach::harness {
namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("run config: " + what);
  };
  require(env == "multilane" || env == "toy", "env must be 'multilane' or 'toy', got '" + env + "'");
  require(!out_dir.empty(), "out_dir must not be empty");
  require(iterations >= 1, "iterations must be >= 1");
  require(sample_batch >= 1, "sample_batch must be >= 1");
  require(replay_batch >= 1, "replay_batch must be >= 1");
  require(eval_episodes >= 0, "eval_episodes must be >= 0");
  require(rolling_every >= 1, "rolling_every must be >= 1");
  require(rolling_window >= 1, "rolling_window must be >= 1");
  require(eval_reselect_every >= 0, "eval_reselect_every must be >= 0");
  require(replay.global_capacity >= 1 && replay.min_tier_capacity >= 1,
          "replay capacities must be positive");
  require(replay.priority_floor >= 0.0, "replay priority_floor must be >= 0");
  agent.validate();
  multilane.validate();
  toy.validate();
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"env", c.env},
          {"seed", c.seed},
          {"out_dir", c.out_dir},
          {"iterations", c.iterations},
          {"sample_batch", c.sample_batch},
          {"replay_batch", c.replay_batch},
          {"eval_episodes", c.eval_episodes},
          {"eval_seed", c.eval_seed},
          {"rolling_every", c.rolling_every},
          {"rolling_window", c.rolling_window},
          {"eval_reselect_every", c.eval_reselect_every},
          {"trajectory_logs", c.trajectory_logs},
          {"agent", agent::to_json(c.agent)},
          {"replay",
           {{"global_capacity", c.replay.global_capacity},
            {"min_tier_capacity", c.replay.min_tier_capacity},
            {"priority_floor", c.replay.priority_floor}}},
          {"multilane", env::to_json(c.multilane)},
          {"toy", env::to_json(c.toy)}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig c;
  const auto reference = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!reference.contains(key)) throw ConfigError("run config: unknown key '" + key + "'");
  }
  try {
    read_field(j, "env", c.env);
    read_field(j, "seed", c.seed);
    read_field(j, "out_dir", c.out_dir);
    read_field(j, "iterations", c.iterations);
    read_field(j, "sample_batch", c.sample_batch);
    read_field(j, "replay_batch", c.replay_batch);
    read_field(j, "eval_episodes", c.eval_episodes);
    read_field(j, "eval_seed", c.eval_seed);
    read_field(j, "rolling_every", c.rolling_every);
    read_field(j, "rolling_window", c.rolling_window);
    read_field(j, "eval_reselect_every", c.eval_reselect_every);
    read_field(j, "trajectory_logs", c.trajectory_logs);
    if (j.contains("agent")) c.agent = agent::agent_config_from_json(j.at("agent"));
    if (j.contains("replay")) {
      const auto& r = j.at("replay");
      if (!r.is_object()) throw ConfigError("run config: replay must be an object");
      for (const auto& [key, _] : r.items()) {
        if (!reference.at("replay").contains(key)) {
          throw ConfigError("replay config: unknown key '" + key + "'");
        }
      }
      read_field(r, "global_capacity", c.replay.global_capacity);
      read_field(r, "min_tier_capacity", c.replay.min_tier_capacity);
      read_field(r, "priority_floor", c.replay.priority_floor);
    }
    if (j.contains("multilane")) c.multilane = env::multilane_config_from_json(j.at("multilane"));
    if (j.contains("toy")) c.toy = env::toy_config_from_json(j.at("toy"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("run config: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::unique_ptr<env::Environment> make_env(const RunConfig& c) {
  if (c.env == "toy") return std::make_unique<env::ToyEnv>(c.toy);
  if (c.env == "multilane") return std::make_unique<env::MultilaneEnv>(c.multilane);
  throw ConfigError("unknown environment '" + c.env + "'");
}

}  // namespace dsach::harness
