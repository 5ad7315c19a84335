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

#include "dsach/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsach/checkpoint.hpp"
#include "dsach/errors.hpp"

namespace dsach::agent {
namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

void blend(ParamVector& target, const ParamVector& online, double tau) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = tau * online[i] + (1.0 - tau) * target[i];
  }
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::kDsacH ? "dsac_h" : "dsac"; }

Mode mode_from_string(const std::string& s) {
  if (s == "dsac_h") return Mode::kDsacH;
  if (s == "dsac") return Mode::kDsac;
  throw ConfigError("unknown agent mode '" + s + "' (expected dsac_h or dsac)");
}

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("agent config: ") + what);
  };
  require(!hidden.empty(), "hidden must list at least one width");
  for (auto w : hidden) require(w > 0, "hidden widths must be positive");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(actor_lr > 0.0 && critic_lr > 0.0 && alpha_lr > 0.0, "learning rates must be positive");
  require(auto_alpha ? initial_alpha > 0.0 : initial_alpha >= 0.0,
          "initial_alpha must be positive (or >= 0 with auto_alpha off)");
  require(std::isnan(target_entropy) || std::isfinite(target_entropy), "target_entropy invalid");
  require(policy_delay >= 1, "policy_delay must be >= 1");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(hpi_max_iter >= 1, "hpi_max_iter must be >= 1");
  require(clip_bound > 0.0, "clip_bound must be positive");
  require(reward_scale > 0.0 && cost_scale > 0.0, "reward_scale and cost_scale must be positive");
  require(audit_every >= 0, "audit_every must be >= 0");
  require(audit_tolerance > 0.0, "audit_tolerance must be positive");
}

nlohmann::json to_json(const AgentConfig& c) {
  return {{"hidden", c.hidden},
          {"activation", nn::to_string(c.activation)},
          {"mode", to_string(c.mode)},
          {"gamma", c.gamma},
          {"tau", c.tau},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"alpha_lr", c.alpha_lr},
          {"initial_alpha", c.initial_alpha},
          {"auto_alpha", c.auto_alpha},
          {"target_entropy",
           std::isnan(c.target_entropy) ? nlohmann::json(nullptr) : nlohmann::json(c.target_entropy)},
          {"policy_delay", c.policy_delay},
          {"lambda", c.lambda},
          {"rho", c.rho},
          {"hpi_max_iter", c.hpi_max_iter},
          {"clip_bound", c.clip_bound},
          {"reward_scale", c.reward_scale},
          {"cost_scale", c.cost_scale},
          {"audit_every", c.audit_every},
          {"audit_tolerance", c.audit_tolerance}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("agent config must be a JSON object");
  AgentConfig c;
  const auto reference = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!reference.contains(key)) throw ConfigError("agent config: unknown key '" + key + "'");
  }
  try {
    read_field(j, "hidden", c.hidden);
    if (j.contains("activation")) c.activation = nn::activation_from_string(j.at("activation"));
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode"));
    read_field(j, "gamma", c.gamma);
    read_field(j, "tau", c.tau);
    read_field(j, "actor_lr", c.actor_lr);
    read_field(j, "critic_lr", c.critic_lr);
    read_field(j, "alpha_lr", c.alpha_lr);
    read_field(j, "initial_alpha", c.initial_alpha);
    read_field(j, "auto_alpha", c.auto_alpha);
    if (j.contains("target_entropy") && !j.at("target_entropy").is_null()) {
      c.target_entropy = j.at("target_entropy").get<double>();
    }
    read_field(j, "policy_delay", c.policy_delay);
    read_field(j, "lambda", c.lambda);
    read_field(j, "rho", c.rho);
    read_field(j, "hpi_max_iter", c.hpi_max_iter);
    read_field(j, "clip_bound", c.clip_bound);
    read_field(j, "reward_scale", c.reward_scale);
    read_field(j, "cost_scale", c.cost_scale);
    read_field(j, "audit_every", c.audit_every);
    read_field(j, "audit_tolerance", c.audit_tolerance);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("agent config: " + std::string(e.what()));
  }
  c.validate();
  return c;
}

// --- agent ------------------------------------------------------------------

Agent::Agent(std::size_t obs_dim, std::size_t act_dim, AgentConfig config, std::uint64_t seed,
             std::vector<double> obs_scale)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      config_(std::move(config)),
      obs_scale_(std::move(obs_scale)),
      actor_(nn::MlpSpec::make(obs_dim, config_.hidden, 2 * act_dim, config_.activation)),
      critic_(nn::MlpSpec::make(obs_dim + act_dim, config_.hidden, 2, config_.activation)) {
  config_.validate();
  if (obs_dim == 0 || act_dim == 0) throw ConfigError("agent: obs_dim and act_dim must be positive");
  if (obs_scale_.empty()) obs_scale_.assign(obs_dim, 1.0);
  if (obs_scale_.size() != obs_dim) throw ConfigError("agent: obs_scale length must equal obs_dim");
  Rng rng(seed);
  theta_ = actor_.init(rng);
  omega_ = critic_.init(rng);
  phi_ = critic_.init(rng);
  omega_target_ = omega_;
  phi_target_ = phi_;
  actor_opt_ = nn::OptimizerState::for_params(theta_.size());
  omega_opt_ = nn::OptimizerState::for_params(omega_.size());
  phi_opt_ = nn::OptimizerState::for_params(phi_.size());
  log_alpha_ = config_.initial_alpha > 0.0 ? std::log(config_.initial_alpha)
                                           : -std::numeric_limits<double>::infinity();
}

void Agent::set_actor_params(ParamVector p) {
  if (p.size() != theta_.size()) throw ConfigError("set_actor_params: length mismatch");
  theta_ = ParamVector(actor_.layout(), std::move(p.values()));
}

void Agent::set_critic_params(Channel c, ParamVector p, bool also_target) {
  if (p.size() != omega_.size()) throw ConfigError("set_critic_params: length mismatch");
  ParamVector v(critic_.layout(), std::move(p.values()));
  auto& online = c == Channel::kReward ? omega_ : phi_;
  auto& target = c == Channel::kReward ? omega_target_ : phi_target_;
  online = v;
  if (also_target) target = v;
}

double Agent::alpha() const {
  return config_.auto_alpha ? std::exp(log_alpha_) : config_.initial_alpha;
}

double Agent::target_entropy() const {
  return std::isnan(config_.target_entropy) ? -static_cast<double>(act_dim_)
                                            : config_.target_entropy;
}

Matrix Agent::scale_obs(const Matrix& raw) const {
  if (static_cast<std::size_t>(raw.rows()) != obs_dim_) {
    throw ConfigError("agent: observation width " + std::to_string(raw.rows()) + " != " +
                      std::to_string(obs_dim_));
  }
  Matrix out = raw;
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) *= obs_scale_[static_cast<std::size_t>(i)];
  return out;
}

Batch Agent::make_batch(std::span<const replay::Transition> items) const {
  const auto n = static_cast<Eigen::Index>(items.size());
  if (n == 0) throw ConfigError("make_batch: empty batch");
  const auto od = static_cast<Eigen::Index>(obs_dim_);
  const auto ad = static_cast<Eigen::Index>(act_dim_);
  Matrix obs(od, n);
  Matrix next(od, n);
  Batch b;
  b.action.resize(ad, n);
  b.reward.resize(n);
  b.cost.resize(n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = items[static_cast<std::size_t>(j)];
    if (t.obs.size() != obs_dim_ || t.next_obs.size() != obs_dim_ || t.action.size() != act_dim_) {
      throw ConfigError("make_batch: transition dimensions do not match the agent");
    }
    obs.col(j) = Eigen::Map<const Vector>(t.obs.data(), od);
    next.col(j) = Eigen::Map<const Vector>(t.next_obs.data(), od);
    b.action.col(j) = Eigen::Map<const Vector>(t.action.data(), ad);
    b.reward(j) = t.reward;
    b.cost(j) = t.cost;
    b.done(j) = t.done ? 1.0 : 0.0;
  }
  b.obs = scale_obs(obs);
  b.next_obs = scale_obs(next);
  return b;
}

Matrix Agent::critic_input(const Matrix& obs, const Matrix& action) const {
  Matrix in(obs.rows() + action.rows(), obs.cols());
  in.topRows(obs.rows()) = obs;
  in.bottomRows(action.rows()) = action;
  return in;
}

PolicyHead Agent::policy_head(const Matrix& scaled_obs) const {
  return split_head(actor_.forward(theta_, scaled_obs));
}

std::vector<double> Agent::act(std::span<const double> raw_obs, Rng& rng, bool deterministic) const {
  if (raw_obs.size() != obs_dim_) throw ConfigError("act: observation width mismatch");
  Matrix obs = Eigen::Map<const Vector>(raw_obs.data(), static_cast<Eigen::Index>(obs_dim_));
  const auto head = policy_head(scale_obs(obs));
  std::vector<double> a(act_dim_);
  for (std::size_t i = 0; i < act_dim_; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double u = deterministic ? head.mean(ii, 0)
                                   : head.mean(ii, 0) + std::exp(head.log_std(ii, 0)) * rng.normal();
    a[i] = std::tanh(u);
  }
  return a;
}

ReturnDistribution Agent::evaluate(Channel c, std::span<const double> raw_obs,
                                   std::span<const double> action) const {
  if (raw_obs.size() != obs_dim_ || action.size() != act_dim_) {
    throw ConfigError("evaluate: dimension mismatch");
  }
  Matrix obs = Eigen::Map<const Vector>(raw_obs.data(), static_cast<Eigen::Index>(obs_dim_));
  Matrix act = Eigen::Map<const Vector>(action.data(), static_cast<Eigen::Index>(act_dim_));
  const auto head = critic_head(critic_.forward(critic_params(c), critic_input(scale_obs(obs), act)));
  return {head.mean(0), head.stddev(0)};
}

SquashedSample Agent::next_actions(const Batch& b, Rng& rng) const {
  const Matrix eps = standard_normal(static_cast<Eigen::Index>(act_dim_), b.size(), rng);
  return squash_sample(policy_head(b.next_obs), eps);
}

Vector Agent::bootstrap(Channel c, const Batch& b, const SquashedSample& next, Rng& rng) const {
  const auto n = b.size();
  const bool reward = c == Channel::kReward;
  const auto z = critic_head(critic_.forward(target_params(c), critic_input(b.next_obs, next.action)));
  const double a = reward ? alpha() : 0.0;
  const double scale = reward ? config_.reward_scale : config_.cost_scale;
  const Vector& signal = reward ? b.reward : b.cost;
  Vector y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double r = scale * signal(j);
    if (b.done(j) != 0.0) {
      y(j) = r;
      continue;
    }
    const double z_next = z.mean(j) + z.stddev(j) * rng.normal();
    y(j) = reward ? r + config_.gamma * (z_next - a * next.log_prob(j)) : r + config_.gamma * z_next;
  }
  return y;
}

Vector Agent::reward_targets(const Batch& b, Rng& rng) const {
  const auto next = next_actions(b, rng);
  return bootstrap(Channel::kReward, b, next, rng);
}

Vector Agent::cost_targets(const Batch& b, Rng& rng) const {
  const auto next = next_actions(b, rng);
  return bootstrap(Channel::kCost, b, next, rng);
}

std::pair<Vector, Vector> Agent::targets(const Batch& b, Rng& rng) const {
  const auto next = next_actions(b, rng);
  Vector y_r = bootstrap(Channel::kReward, b, next, rng);
  Vector y_c = bootstrap(Channel::kCost, b, next, rng);
  return {std::move(y_r), std::move(y_c)};
}

double Agent::critic_objective(Channel c, const ParamVector& params, const Batch& b,
                               const Vector& targets, GradientVector* grad,
                               CriticUpdate* stats) const {
  const auto n = b.size();
  if (targets.size() != n) throw ConfigError("critic_objective: target count mismatch");
  nn::Tape tape;
  const auto head = critic_head(critic_.forward(params, critic_input(b.obs, b.action), tape));
  if (stats) {
    stats->mean_q = head.mean.mean();
    stats->sq_error.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      stats->sq_error[static_cast<std::size_t>(j)] = replay::compute_priority(head.mean(j), targets(j));
    }
  }
  Vector d_mean(n);
  Vector d_std(n);
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto l = critic_loss({head.mean(j), head.stddev(j)}, targets(j), config_.clip_bound);
    total += l.loss;
    d_mean(j) = l.d_mean * inv_n;
    d_std(j) = l.d_std * inv_n;
  }
  if (grad) {
    critic_.backward(params, tape, critic_head_backward(head, d_mean, d_std), grad);
    grad->require_finite(c == Channel::kReward ? "reward critic gradient" : "cost critic gradient");
  }
  return total * inv_n;
}

CriticUpdate Agent::update_critic(Channel c, const Batch& b, const Vector& targets) {
  auto& params = c == Channel::kReward ? omega_ : phi_;
  auto& opt = c == Channel::kReward ? omega_opt_ : phi_opt_;
  CriticUpdate out;
  auto grad = GradientVector::zeros_like(params);
  out.loss = critic_objective(c, params, b, targets, &grad, &out);
  nn::adam_step(params, grad, opt, config_.critic_lr);
  return out;
}

double Agent::actor_objective(ActorObjective o, const ParamVector& theta, const Batch& b,
                              const Matrix& eps, GradientVector* grad,
                              double* mean_log_prob) const {
  const auto n = b.size();
  nn::Tape at;
  const auto head = split_head(actor_.forward(theta, b.obs, at));
  const auto s = squash_sample(head, eps);
  if (mean_log_prob) *mean_log_prob = s.log_prob.mean();
  const double inv_n = 1.0 / static_cast<double>(n);
  double value = 0.0;
  Matrix d_action;
  Vector d_logp;
  if (o == ActorObjective::kLogProb) {
    value = s.log_prob.mean();
    d_logp = Vector::Constant(n, inv_n);
  } else {
    const auto& omega = o == ActorObjective::kReward ? omega_ : phi_;
    nn::Tape ct;
    const auto q = critic_head(critic_.forward(omega, critic_input(b.obs, s.action), ct));
    const double sign = o == ActorObjective::kReward ? -1.0 : 1.0;
    value = sign * q.mean.mean();
    if (o == ActorObjective::kReward) {
      const double a = alpha();
      value += a * s.log_prob.mean();
      d_logp = Vector::Constant(n, a * inv_n);
    }
    if (grad) {
      const Matrix d_out =
          critic_head_backward(q, Vector::Constant(n, sign * inv_n), Vector::Zero(n));
      const Matrix d_in = critic_.backward(omega, ct, d_out, nullptr);
      d_action = d_in.bottomRows(static_cast<Eigen::Index>(act_dim_));
    }
  }
  if (grad) {
    const Matrix d_net = squash_backward(head, eps, s, d_action, d_logp);
    actor_.backward(theta, at, d_net, grad);
  }
  return value;
}

std::pair<GradientVector, GradientVector> Agent::policy_gradients(const Batch& b, const Matrix& eps,
                                                                  double* mean_log_prob) const {
  auto g_r = GradientVector::zeros_like(theta_);
  auto g_c = GradientVector::zeros_like(theta_);
  actor_objective(ActorObjective::kReward, theta_, b, eps, &g_r, mean_log_prob);
  if (config_.mode == Mode::kDsacH) actor_objective(ActorObjective::kCost, theta_, b, eps, &g_c);
  g_r.require_finite("reward policy gradient");
  g_c.require_finite("cost policy gradient");
  return {std::move(g_r), std::move(g_c)};
}

ActorUpdate Agent::update_actor(const GradientVector& g_r, const GradientVector& g_c) {
  ActorUpdate out;
  if (config_.mode == Mode::kDsac) {
    out.worst_inner = nn::dot(g_r.span(), g_r.span());
    out.grad_inner = std::numeric_limits<double>::quiet_NaN();
    nn::adam_step(theta_, g_r, actor_opt_, config_.actor_lr);
    out.applied = true;
    return out;
  }
  hpi::HpiProblem problem{g_r, g_c, config_.lambda, config_.rho, config_.hpi_max_iter};
  const auto sol = hpi::solve_harmonic(problem);
  out.grad_inner = nn::dot(g_r.span(), g_c.span());
  out.worst_inner = sol.worst_inner;
  out.w_star = sol.w_star;
  out.hpi_iterations = sol.iterations_used;
  if (sol.degenerate) {
    out.degenerate = true;
    return out;
  }
  const auto g_hat = hpi::nominal_gradient(g_r.span(), g_c.span(), config_.lambda);
  const double scale = 1.0 + nn::dot(g_hat.span(), g_hat.span());
  const double tol = 1e-9 * scale;
  if (sol.feasibility_slack < -tol) {
    throw NumericalError("harmonic step left the trust region (slack " +
                         std::to_string(sol.feasibility_slack) + ")");
  }
  const double floor = std::min(nn::dot(g_r.span(), g_hat.span()), nn::dot(g_c.span(), g_hat.span()));
  if (sol.worst_inner < floor - tol) {
    throw NumericalError("harmonic step regressed below the nominal gradient");
  }
  GradientVector h(theta_.layout(), sol.h.values());
  nn::adam_step(theta_, h, actor_opt_, config_.actor_lr);
  out.applied = true;
  return out;
}

ActorUpdate Agent::actor_step(const Batch& b, Rng& rng) {
  const Matrix eps = standard_normal(static_cast<Eigen::Index>(act_dim_), b.size(), rng);
  double mean_logp = 0.0;
  auto [g_r, g_c] = policy_gradients(b, eps, &mean_logp);
  double audit = 0.0;
  ++actor_updates_;
  if (config_.audit_every > 0 && actor_updates_ % static_cast<std::uint64_t>(config_.audit_every) == 0) {
    nn::FiniteDiffOptions opt;
    opt.max_coords = 16;
    opt.seed = actor_updates_;
    opt.abs_floor = 1e-4;
    for (auto o : {ActorObjective::kReward, ActorObjective::kCost}) {
      if (o == ActorObjective::kCost && config_.mode == Mode::kDsac) continue;
      nn::ScalarObjective f = [&, o](const ParamVector& p, GradientVector* g) {
        return actor_objective(o, p, b, eps, g);
      };
      const auto rep = nn::finite_diff_check(f, theta_, opt);
      audit = std::max(audit, rep.max_rel_error);
    }
    if (audit > config_.audit_tolerance) {
      throw NumericalError("actor gradient audit failed: relative error " + std::to_string(audit));
    }
  }
  auto out = update_actor(g_r, g_c);
  out.mean_log_prob = mean_logp;
  out.audit_error = audit;
  return out;
}

void Agent::update_temperature(double mean_log_prob) {
  if (!config_.auto_alpha) return;
  const double grad = -(mean_log_prob + target_entropy());
  if (!std::isfinite(grad)) throw NumericalError("temperature gradient is not finite");
  log_alpha_ = alpha_opt_.step_value(log_alpha_, grad, config_.alpha_lr);
}

void Agent::soft_update_targets(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("soft_update_targets: tau must lie in (0, 1]");
  blend(omega_target_, omega_, tau);
  blend(phi_target_, phi_, tau);
}

UpdateMetrics Agent::train_on_batch(const Batch& b, Rng& rng) {
  UpdateMetrics m;
  const auto [y_r, y_c] = targets(b, rng);
  const auto ur = update_critic(Channel::kReward, b, y_r);
  const auto uc = update_critic(Channel::kCost, b, y_c);
  m.reward_critic_loss = ur.loss;
  m.cost_critic_loss = uc.loss;
  m.mean_q_r = ur.mean_q;
  m.mean_q_c = uc.mean_q;
  m.priorities = ur.sq_error;
  ++iteration_;
  if (iteration_ % static_cast<std::uint64_t>(config_.policy_delay) == 0) {
    m.actor = actor_step(b, rng);
    m.actor_updated = true;
    update_temperature(m.actor.mean_log_prob);
  }
  soft_update_targets(config_.tau);
  m.alpha = alpha();
  return m;
}

void Agent::save(const std::filesystem::path& stem) const {
  nn::CheckpointWriter w;
  w.add_array("actor", theta_.span());
  w.add_array("reward_critic", omega_.span());
  w.add_array("cost_critic", phi_.span());
  w.add_array("reward_target", omega_target_.span());
  w.add_array("cost_target", phi_target_.span());
  w.add_array("obs_scale", obs_scale_);
  nn::add_optimizer(w, "actor_opt", actor_opt_);
  nn::add_optimizer(w, "reward_opt", omega_opt_);
  nn::add_optimizer(w, "cost_opt", phi_opt_);
  auto& meta = w.meta();
  meta["kind"] = "dsach-agent";
  meta["obs_dim"] = obs_dim_;
  meta["act_dim"] = act_dim_;
  meta["config"] = to_json(config_);
  meta["actor_spec"] = nn::to_json(actor_.spec());
  meta["critic_spec"] = nn::to_json(critic_.spec());
  meta["log_alpha"] = std::isfinite(log_alpha_) ? nlohmann::json(log_alpha_) : nlohmann::json(nullptr);
  meta["alpha_opt"] = {{"m", alpha_opt_.m}, {"v", alpha_opt_.v}, {"step", alpha_opt_.step}};
  meta["iteration"] = iteration_;
  meta["actor_updates"] = actor_updates_;
  w.write(stem);
}

Agent Agent::load(const std::filesystem::path& stem) {
  const auto r = nn::CheckpointReader::load(stem);
  const auto& meta = r.meta();
  try {
    if (meta.value("kind", "") != "dsach-agent") throw ConfigError("checkpoint is not an agent");
    const auto obs_dim = meta.at("obs_dim").get<std::size_t>();
    const auto act_dim = meta.at("act_dim").get<std::size_t>();
    Agent a(obs_dim, act_dim, agent_config_from_json(meta.at("config")), 0, r.array("obs_scale"));
    if (!(nn::mlp_spec_from_json(meta.at("actor_spec")) == a.actor_.spec()) ||
        !(nn::mlp_spec_from_json(meta.at("critic_spec")) == a.critic_.spec())) {
      throw ConfigError("checkpoint network specs do not match its config");
    }
    auto load_params = [&](const char* name, ParamVector& dst) {
      const auto& v = r.array(name);
      if (v.size() != dst.size()) throw ConfigError(std::string("checkpoint array size mismatch: ") + name);
      dst = ParamVector(dst.layout(), v);
    };
    load_params("actor", a.theta_);
    load_params("reward_critic", a.omega_);
    load_params("cost_critic", a.phi_);
    load_params("reward_target", a.omega_target_);
    load_params("cost_target", a.phi_target_);
    a.actor_opt_ = nn::read_optimizer(r, "actor_opt");
    a.omega_opt_ = nn::read_optimizer(r, "reward_opt");
    a.phi_opt_ = nn::read_optimizer(r, "cost_opt");
    a.log_alpha_ = meta.at("log_alpha").is_null() ? -std::numeric_limits<double>::infinity()
                                                  : meta.at("log_alpha").get<double>();
    a.alpha_opt_.m = meta.at("alpha_opt").at("m");
    a.alpha_opt_.v = meta.at("alpha_opt").at("v");
    a.alpha_opt_.step = meta.at("alpha_opt").at("step");
    a.iteration_ = meta.at("iteration");
    a.actor_updates_ = meta.at("actor_updates");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed agent checkpoint: " + std::string(e.what()));
  }
}

}  // namespace dsach::agent
