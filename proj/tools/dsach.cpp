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

// Command line driver: train, eval and hpi-solve.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>

#include "dsach/errors.hpp"
#include "dsach/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsach::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw dsach::ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsach: safe distributional soft actor-critic with harmonic policy updates"};
  app.require_subcommand(1);

  std::string train_config;
  std::optional<std::uint64_t> train_seed;
  std::optional<std::string> train_out;
  std::optional<std::int64_t> train_iters;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train an agent and write metrics and a checkpoint");
  train->add_option("--config", train_config, "Run configuration (JSON)");
  train->add_option("--seed", train_seed, "Overrides the configured seed");
  train->add_option("--out", train_out, "Overrides the configured output directory");
  train->add_option("--iterations", train_iters, "Overrides the configured iteration count");
  train->add_flag("--quiet", quiet, "Suppress progress lines");

  std::string ckpt;
  int episodes = 50;
  std::string eval_out = "eval";
  std::optional<std::uint64_t> eval_seed;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out scenarios");
  eval->add_option("--ckpt", ckpt, "Run directory or checkpoint stem")->required();
  eval->add_option("--episodes", episodes, "Number of evaluation episodes");
  eval->add_option("--out", eval_out, "Output directory");
  eval->add_option("--seed", eval_seed, "Base seed of the held-out scenarios");

  std::string hpi_in;
  auto* hpi = app.add_subcommand("hpi-solve", "Solve one harmonic-gradient problem");
  hpi->add_option("--in", hpi_in, "Problem JSON {g_r, g_c, lambda, rho, max_iter}")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      nlohmann::json j = train_config.empty() ? nlohmann::json::object() : read_json(train_config);
      if (train_seed) j["seed"] = *train_seed;
      if (train_out) j["out_dir"] = *train_out;
      if (train_iters) j["iterations"] = *train_iters;
      const auto config = dsach::harness::run_config_from_json(j);
      const auto r = dsach::harness::cmd_train(config, quiet ? nullptr : &std::cerr);
      std::cout << nlohmann::json{{"out_dir", r.out_dir.string()},
                                  {"checkpoint", r.checkpoint.string()},
                                  {"episodes", r.episodes.size()},
                                  {"arrival_rate", r.final_rolling.arrival_rate},
                                  {"collision_rate", r.final_rolling.collision_rate},
                                  {"seconds", r.seconds}}
                       .dump()
                << '\n';
    } else if (*eval) {
      const auto r = dsach::harness::cmd_eval(ckpt, episodes, eval_out, eval_seed);
      std::cout << nlohmann::json{{"episodes", r.episodes.size()},
                                  {"arrival_rate", r.arrival_rate},
                                  {"collision_rate", r.collision_rate},
                                  {"out_of_area_rate", r.out_of_area_rate},
                                  {"collisions", r.collisions},
                                  {"mean_return", r.mean_return},
                                  {"mean_cost", r.mean_cost}}
                       .dump()
                << '\n';
    } else if (*hpi) {
      std::cout << dsach::harness::cmd_hpi_solve(read_json(hpi_in)).dump() << '\n';
    }
  } catch (const dsach::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dsach::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
