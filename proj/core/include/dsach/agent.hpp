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
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsach/adam.hpp"
#include "dsach/critic.hpp"
#include "dsach/gradcheck.hpp"
#include "dsach/hpi.hpp"
#include "dsach/mlp.hpp"
#include "dsach/policy.hpp"
#include "dsach/replay.hpp"
#include "dsach/rng.hpp"

namespace dsach::agent {

using nn::GradientVector;
using nn::ParamVector;

/// kDsacH steers the actor with the harmonic gradient of the reward and cost
/// gradients; kDsac follows the reward gradient alone (cost critic still
/// trained for reporting).
enum class Mode { kDsacH, kDsac };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct AgentConfig {
  std::vector<std::size_t> hidden{256, 256};
  nn::Activation activation = nn::Activation::kTanh;
  Mode mode = Mode::kDsacH;
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 1e-4;
  double alpha_lr = 3e-4;
  double initial_alpha = 0.2;
  bool auto_alpha = true;
  /// Defaults to -dim(A) when left as NaN.
  double target_entropy = std::numeric_limits<double>::quiet_NaN();
  int policy_delay = 2;
  double lambda = 1.0;
  double rho = 0.9;
  int hpi_max_iter = 20;
  /// Stddev multiple bounding the target on the variance gradient path.
  double clip_bound = 10.0;
  double reward_scale = 1.0;
  double cost_scale = 1.0;
  /// Finite-difference audit of the actor gradients every N actor updates
  /// (0 disables).
  int audit_every = 0;
  double audit_tolerance = 1e-3;

  void validate() const;
};

nlohmann::json to_json(const AgentConfig& c);
/// Unknown keys raise ConfigError.
AgentConfig agent_config_from_json(const nlohmann::json& j);

/// Column-major minibatch (one column per transition). Observations are
/// stored already scaled.
struct Batch {
  Matrix obs;
  Matrix action;
  Matrix next_obs;
  Vector reward;
  Vector cost;
  Vector done;

  Eigen::Index size() const { return obs.cols(); }
};

enum class Channel { kReward, kCost };

/// Scalar objectives the actor gradients differentiate.
enum class ActorObjective { kReward, kCost, kLogProb };

struct CriticUpdate {
  double loss = 0.0;
  double mean_q = 0.0;
  /// Squared error between the pre-update mean and the target, per item.
  std::vector<double> sq_error;
};

struct ActorUpdate {
  bool applied = false;
  bool degenerate = false;
  double worst_inner = 0.0;
  double grad_inner = 0.0;
  double mean_log_prob = 0.0;
  double w_star = 0.0;
  int hpi_iterations = 0;
  double audit_error = 0.0;
};

struct UpdateMetrics {
  double reward_critic_loss = 0.0;
  double cost_critic_loss = 0.0;
  double mean_q_r = 0.0;
  double mean_q_c = 0.0;
  double alpha = 0.0;
  bool actor_updated = false;
  ActorUpdate actor;
  std::vector<double> priorities;
};

class Agent {
 public:
  Agent(std::size_t obs_dim, std::size_t act_dim, AgentConfig config, std::uint64_t seed,
        std::vector<double> obs_scale = {});

  const AgentConfig& config() const { return config_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  const std::vector<double>& obs_scale() const { return obs_scale_; }
  const nn::Mlp& actor_net() const { return actor_; }
  const nn::Mlp& critic_net() const { return critic_; }

  const ParamVector& actor_params() const { return theta_; }
  const ParamVector& critic_params(Channel c) const { return c == Channel::kReward ? omega_ : phi_; }
  const ParamVector& target_params(Channel c) const {
    return c == Channel::kReward ? omega_target_ : phi_target_;
  }
  void set_actor_params(ParamVector p);
  void set_critic_params(Channel c, ParamVector p, bool also_target = true);
  const nn::OptimizerState& actor_optimizer() const { return actor_opt_; }

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  double target_entropy() const;
  std::uint64_t iteration() const { return iteration_; }

  /// Builds a batch, applying the observation scale.
  Batch make_batch(std::span<const replay::Transition> items) const;
  Matrix scale_obs(const Matrix& raw) const;

  /// Policy action in [-1, 1]^act_dim for a raw observation. Deterministic
  /// mode returns tanh(mean).
  std::vector<double> act(std::span<const double> raw_obs, Rng& rng, bool deterministic) const;
  PolicyHead policy_head(const Matrix& scaled_obs) const;
  /// Return distribution of a critic at (raw observation, action).
  ReturnDistribution evaluate(Channel c, std::span<const double> raw_obs,
                              std::span<const double> action) const;

  Vector reward_targets(const Batch& b, Rng& rng) const;
  Vector cost_targets(const Batch& b, Rng& rng) const;
  /// Both targets from one shared next-action sample.
  std::pair<Vector, Vector> targets(const Batch& b, Rng& rng) const;
  CriticUpdate update_critic(Channel c, const Batch& b, const Vector& targets);
  /// Mean critic loss over the batch and, when `grad` is set, its gradient.
  double critic_objective(Channel c, const ParamVector& params, const Batch& b,
                          const Vector& targets, GradientVector* grad,
                          CriticUpdate* stats = nullptr) const;

  /// Actor objective at `theta` with fixed reparameterization noise:
  ///   kReward:  mean(alpha log pi - Q_r)
  ///   kCost:    mean(Q_c)
  ///   kLogProb: mean(log pi)
  double actor_objective(ActorObjective o, const ParamVector& theta, const Batch& b,
                         const Matrix& eps, GradientVector* grad,
                         double* mean_log_prob = nullptr) const;
  /// (g_r, g_c) at the current actor parameters.
  std::pair<GradientVector, GradientVector> policy_gradients(const Batch& b, const Matrix& eps,
                                                             double* mean_log_prob = nullptr) const;

  /// Applies one optimizer step along the mode's direction. Skipped when the
  /// harmonic problem is degenerate.
  ActorUpdate update_actor(const GradientVector& g_r, const GradientVector& g_c);
  /// Draws noise, computes gradients and updates the actor.
  ActorUpdate actor_step(const Batch& b, Rng& rng);
  /// One step on log(alpha) with gradient -(mean_log_prob + target_entropy).
  void update_temperature(double mean_log_prob);
  void soft_update_targets(double tau);

  /// Critic updates every call; actor and temperature every policy_delay
  /// calls; then target soft update.
  UpdateMetrics train_on_batch(const Batch& b, Rng& rng);

  void save(const std::filesystem::path& stem) const;
  static Agent load(const std::filesystem::path& stem);

 private:
  SquashedSample next_actions(const Batch& b, Rng& rng) const;
  Vector bootstrap(Channel c, const Batch& b, const SquashedSample& next, Rng& rng) const;
  Matrix critic_input(const Matrix& obs, const Matrix& action) const;

  std::size_t obs_dim_;
  std::size_t act_dim_;
  AgentConfig config_;
  std::vector<double> obs_scale_;
  nn::Mlp actor_;
  nn::Mlp critic_;
  ParamVector theta_;
  ParamVector omega_;
  ParamVector phi_;
  ParamVector omega_target_;
  ParamVector phi_target_;
  nn::OptimizerState actor_opt_;
  nn::OptimizerState omega_opt_;
  nn::OptimizerState phi_opt_;
  nn::ScalarAdam alpha_opt_;
  double log_alpha_ = 0.0;
  std::uint64_t iteration_ = 0;
  std::uint64_t actor_updates_ = 0;
};

}  // namespace dsach::agent
