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

#include "dsach/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dsach/errors.hpp"
#include "dsach/hpi.hpp"
#include "dsach/multilane.hpp"

namespace dsach::harness {
namespace fs = std::filesystem;
namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

void write_episode_row(std::ostream& out, const EpisodeSummary& e) {
  out << e.index << ',' << fmt(e.ret) << ',' << fmt(e.cost) << ',' << e.length << ','
      << train::to_string(e.outcome) << ',' << (e.arrived() ? 1 : 0) << '\n';
}

void write_trajectory(const fs::path& p, const std::vector<env::TrajectoryRow>& rows) {
  auto out = open_out(p);
  write_header(out, env::trajectory_columns());
  for (const auto& r : rows) {
    out << r.step << ',' << fmt(r.x) << ',' << fmt(r.y) << ',' << fmt(r.phi) << ',' << fmt(r.v_x)
        << ',' << fmt(r.a_x) << ',' << fmt(r.delta) << ',' << fmt(r.y_err) << ','
        << fmt(r.phi_err) << ',' << fmt(r.reward) << ',' << fmt(r.cost) << ','
        << replay::to_string(r.event) << '\n';
  }
}

nlohmann::json summary_json(const EvalResult& r) {
  return {{"episodes", r.episodes.size()},     {"arrival_rate", r.arrival_rate},
          {"collision_rate", r.collision_rate}, {"out_of_area_rate", r.out_of_area_rate},
          {"mean_return", r.mean_return},       {"mean_cost", r.mean_cost},
          {"collisions", r.collisions}};
}

std::vector<double> as_vector(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("hpi-solve: missing '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array()) throw ConfigError(std::string("hpi-solve: '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& v : a) {
    if (!v.is_number()) throw ConfigError(std::string("hpi-solve: '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{
      "step",  "reward_critic_loss", "cost_critic_loss", "actor_worst_inner", "grad_inner_product",
      "alpha", "mean_Q_r",           "mean_Q_c",         "episodes_done"};
  return cols;
}

const std::vector<std::string>& rolling_columns() {
  static const std::vector<std::string> cols{"step",           "episodes_done",  "window",
                                             "arrival_rate",   "collision_rate", "out_of_area_rate",
                                             "mean_return",    "mean_cost"};
  return cols;
}

const std::vector<std::string>& episode_columns() {
  static const std::vector<std::string> cols{"episode", "return", "cost", "length", "outcome",
                                             "arrived"};
  return cols;
}

nlohmann::json schemas() {
  return {{"version", kSchemaVersion},
          {"metrics.csv", metrics_columns()},
          {"rolling.csv", rolling_columns()},
          {"episodes.csv", episode_columns()},
          {"eval_episodes.csv", episode_columns()},
          {"trajectory", env::trajectory_columns()}};
}

RollingStats rolling_stats(const std::vector<EpisodeSummary>& episodes, std::size_t window) {
  RollingStats s;
  s.episodes_done = episodes.size();
  const std::size_t n = std::min(window, episodes.size());
  s.window = n;
  if (n == 0) return s;
  for (std::size_t i = episodes.size() - n; i < episodes.size(); ++i) {
    const auto& e = episodes[i];
    s.arrival_rate += e.arrived();
    s.collision_rate += e.collision();
    s.out_of_area_rate += e.out_of_area();
    s.mean_return += e.ret;
    s.mean_cost += e.cost;
  }
  const double inv = 1.0 / static_cast<double>(n);
  s.arrival_rate *= inv;
  s.collision_rate *= inv;
  s.out_of_area_rate *= inv;
  s.mean_return *= inv;
  s.mean_cost *= inv;
  return s;
}

TrainResult cmd_train(const RunConfig& config, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.out_dir = config.out_dir;
  fs::create_directories(result.out_dir / "checkpoint");
  write_json(result.out_dir / "resolved_config.json", to_json(config));
  write_json(result.out_dir / "schemas.json", schemas());

  auto environment = make_env(config);
  Rng root(config.seed);
  const auto agent_seed = root.next_u64();
  agent::Agent agent(environment->obs_dim(), environment->act_dim(), config.agent, agent_seed,
                     environment->obs_scale());
  replay::HierarchicalBuffer buffer(config.replay);
  train::EnvSampler sampler(*environment, root.split());
  Rng update_rng = root.split();
  const train::TrainSchedule schedule{config.sample_batch, config.replay_batch};

  auto metrics = open_out(result.out_dir / "metrics.csv");
  auto rolling = open_out(result.out_dir / "rolling.csv");
  auto episodes = open_out(result.out_dir / "episodes.csv");
  write_header(metrics, metrics_columns());
  write_header(rolling, rolling_columns());
  write_header(episodes, episode_columns());

  train::StepMetrics prev;
  for (std::int64_t k = 1; k <= config.iterations; ++k) {
    auto m = train::train_step(agent, buffer, sampler, schedule, update_rng,
                               static_cast<std::uint64_t>(k), &prev);
    for (const auto& e : m.finished) {
      write_episode_row(episodes, e);
      result.episodes.push_back(e);
    }
    if (m.updated) {
      metrics << m.step << ',' << fmt(m.reward_critic_loss) << ',' << fmt(m.cost_critic_loss)
              << ',' << fmt(m.actor_worst_inner) << ',' << fmt(m.grad_inner_product) << ','
              << fmt(m.alpha) << ',' << fmt(m.mean_q_r) << ',' << fmt(m.mean_q_c) << ','
              << m.episodes_done << '\n';
    }
    if (k % config.rolling_every == 0 || k == config.iterations) {
      auto r = rolling_stats(result.episodes, static_cast<std::size_t>(config.rolling_window));
      r.step = static_cast<std::uint64_t>(k);
      rolling << r.step << ',' << r.episodes_done << ',' << r.window << ',' << fmt(r.arrival_rate)
              << ',' << fmt(r.collision_rate) << ',' << fmt(r.out_of_area_rate) << ','
              << fmt(r.mean_return) << ',' << fmt(r.mean_cost) << '\n';
      if (log) {
        *log << "[train] step " << k << " episodes " << r.episodes_done << " arrival "
             << fmt(r.arrival_rate) << " collision " << fmt(r.collision_rate) << " return "
             << fmt(r.mean_return) << " cost " << fmt(r.mean_cost) << " alpha " << fmt(m.alpha)
             << '\n';
      }
      result.final_rolling = r;
    }
    prev = std::move(m);
    prev.finished.clear();
  }
  result.checkpoint = result.out_dir / "checkpoint" / "agent";
  agent.save(result.checkpoint);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(result.out_dir / "run_info.json",
             {{"execution", "single_worker"},
              {"deterministic", true},
              {"iterations", config.iterations},
              {"episodes", result.episodes.size()},
              {"env_steps", sampler.env_steps()},
              {"seconds", result.seconds}});
  return result;
}

EvalResult summarize(std::vector<EpisodeSummary> episodes) {
  EvalResult r;
  const auto stats = rolling_stats(episodes, episodes.size());
  r.arrival_rate = stats.arrival_rate;
  r.collision_rate = stats.collision_rate;
  r.out_of_area_rate = stats.out_of_area_rate;
  r.mean_return = stats.mean_return;
  r.mean_cost = stats.mean_cost;
  for (const auto& e : episodes) r.collisions += e.collision();
  r.episodes = std::move(episodes);
  return r;
}

EvalResult evaluate_policy(env::Environment& env, const train::Policy& policy, int episodes,
                           std::uint64_t seed, const fs::path* out_dir, bool trajectories,
                           const train::StepHook& hook) {
  std::vector<EpisodeSummary> eps;
  if (out_dir && trajectories) fs::create_directories(*out_dir / "trajectories");
  for (int i = 0; i < episodes; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    std::vector<env::TrajectoryRow> rows;
    auto s = train::run_episode(env, rng, policy, out_dir && trajectories ? &rows : nullptr, hook);
    s.index = static_cast<std::uint64_t>(i);
    if (out_dir && trajectories) {
      std::ostringstream name;
      name << "episode_" << std::setw(4) << std::setfill('0') << i << ".csv";
      write_trajectory(*out_dir / "trajectories" / name.str(), rows);
    }
    eps.push_back(s);
  }
  auto result = summarize(std::move(eps));
  if (out_dir) {
    fs::create_directories(*out_dir);
    auto out = open_out(*out_dir / "eval_episodes.csv");
    write_header(out, episode_columns());
    for (const auto& e : result.episodes) write_episode_row(out, e);
    write_json(*out_dir / "eval_summary.json", summary_json(result));
  }
  return result;
}

EvalResult evaluate_agent(const agent::Agent& agent, const RunConfig& config, int episodes,
                          std::uint64_t seed, const fs::path* out_dir) {
  auto environment = make_env(config);
  Rng unused(0);
  train::Policy policy = [&](std::span<const double> obs) { return agent.act(obs, unused, true); };
  train::StepHook hook;
  if (config.env == "multilane" && config.eval_reselect_every > 0) {
    const double lambda = config.agent.lambda;
    hook = [&, lambda](env::Environment& e, int step) {
      if (step % config.eval_reselect_every != 0) return;
      auto& ml = dynamic_cast<env::MultilaneEnv&>(e);
      const int lane = env::select_reference(ml, [&](std::span<const double> obs) {
        const auto a = agent.act(obs, unused, true);
        return agent.evaluate(agent::Channel::kReward, obs, a).mean -
               lambda * agent.evaluate(agent::Channel::kCost, obs, a).mean;
      });
      if (lane != ml.state().ref_lane) {
        auto st = ml.state();
        st.ref_lane = lane;
        ml.set_state(std::move(st));
      }
    };
  }
  return evaluate_policy(*environment, policy, episodes, seed, out_dir, config.trajectory_logs,
                         hook);
}

EvalResult cmd_eval(const fs::path& ckpt, int episodes, const fs::path& out_dir,
                    std::optional<std::uint64_t> seed) {
  if (episodes < 0) throw ConfigError("eval: episodes must be >= 0");
  fs::path stem = ckpt;
  if (fs::is_directory(ckpt)) {
    stem = fs::exists(ckpt / "checkpoint" / "agent.json") ? ckpt / "checkpoint" / "agent"
                                                           : ckpt / "agent";
  } else if (stem.extension() == ".json" || stem.extension() == ".bin") {
    stem.replace_extension();
  }
  if (!fs::exists(fs::path(stem.string() + ".json"))) {
    throw ConfigError("eval: no checkpoint found at " + ckpt.string());
  }
  // The checkpoint lives at <run>/checkpoint/agent; the run config sits in <run>.
  const auto run_dir = stem.parent_path().parent_path();
  const auto cfg_path = run_dir / "resolved_config.json";
  if (!fs::exists(cfg_path)) throw ConfigError("eval: missing " + cfg_path.string());
  const auto config = load_run_config(cfg_path);
  const auto agent = agent::Agent::load(stem);
  const auto environment = make_env(config);
  if (environment->obs_dim() != agent.obs_dim() || environment->act_dim() != agent.act_dim()) {
    throw ConfigError("eval: checkpoint dimensions do not match the configured environment");
  }
  return evaluate_agent(agent, config, episodes, seed.value_or(config.eval_seed), &out_dir);
}

nlohmann::json cmd_hpi_solve(const nlohmann::json& in) {
  if (!in.is_object()) throw ConfigError("hpi-solve: input must be a JSON object");
  for (const auto& [key, _] : in.items()) {
    if (key != "g_r" && key != "g_c" && key != "lambda" && key != "rho" && key != "max_iter") {
      throw ConfigError("hpi-solve: unknown key '" + key + "'");
    }
  }
  hpi::HpiProblem p;
  p.g_r = nn::GradientVector(as_vector(in, "g_r"));
  p.g_c = nn::GradientVector(as_vector(in, "g_c"));
  try {
    if (in.contains("lambda")) p.lambda = in.at("lambda").get<double>();
    if (in.contains("rho")) p.rho = in.at("rho").get<double>();
    if (in.contains("max_iter")) p.max_iter = in.at("max_iter").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("hpi-solve: " + std::string(e.what()));
  }
  const auto s = hpi::solve_harmonic(p);
  return {{"h", s.h.values()},
          {"w_star", s.w_star},
          {"inner_r", s.inner_r},
          {"inner_c", s.inner_c},
          {"worst_inner", s.worst_inner},
          {"feasibility_slack", s.feasibility_slack},
          {"radius", s.radius},
          {"iterations_used", s.iterations_used},
          {"degenerate", s.degenerate},
          {"conflict", hpi::detect_conflict(p.g_r.span(), p.g_c.span()).conflict}};
}

}  // namespace dsach::harness
