#include "sgl/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "sgl/errors.hpp"
#include "sgl/kv_config.hpp"
#include "sgl/parallel.hpp"

namespace sgl::rl {

void TrainConfig::validate() const {
  if (total_steps < 1) throw ValidationError("total_steps", "must be positive");
  if (steps_per_update < 1) throw ValidationError("steps_per_update", "must be positive");
  if (minibatch_size < 1 || steps_per_update % minibatch_size != 0) {
    throw ValidationError("minibatch_size", "must divide steps_per_update");
  }
  if (epochs_per_update < 1) throw ValidationError("epochs_per_update", "must be positive");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ValidationError("clip_epsilon", "must be in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma", "must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ValidationError("gae_lambda", "must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate", "must be positive");
  if (!(max_grad_norm > 0.0)) throw ValidationError("max_grad_norm", "must be positive");
  if (value_coef < 0.0) throw ValidationError("value_coef", "must be non-negative");
  if (entropy_coef < 0.0) throw ValidationError("entropy_coef", "must be non-negative");
  if (episode_length < 1) throw ValidationError("episode_length", "must be positive");
  if (warmup_episodes < 0) throw ValidationError("warmup_episodes", "must be non-negative");
  if (velocity_cycle.empty()) throw ValidationError("velocity_cycle", "must not be empty");
  if (checkpoint_every < 1) throw ValidationError("checkpoint_every", "must be positive");
  if (!(reward.a1 > 0.0 && reward.a2 > 0.0 && reward.b1 > 0.0)) throw ValidationError("reward", "parameters must be positive");
}

int TrainConfig::num_updates() const {
  return static_cast<int>((total_steps + steps_per_update - 1) / steps_per_update);
}

double scheduled_velocity(const TrainConfig& cfg, long episode) {
  if (cfg.fixed_velocity) return *cfg.fixed_velocity;
  if (episode < cfg.warmup_episodes) return cfg.warmup_velocity;
  const long k = episode - cfg.warmup_episodes;
  return cfg.velocity_cycle[static_cast<std::size_t>(k % static_cast<long>(cfg.velocity_cycle.size()))];
}

RolloutBatch::RolloutBatch(int obs_dim, int act_dim, int n)
    : observations(obs_dim, n),
      actions(act_dim, n),
      log_probs(n),
      rewards(n),
      values(n),
      advantages(Eigen::VectorXd::Zero(n)),
      returns(Eigen::VectorXd::Zero(n)),
      segment_end(n, 0),
      bootstrap(Eigen::VectorXd::Zero(n)) {}

void RolloutBatch::validate() const {
  const Eigen::Index n = rewards.size();
  if (observations.cols() != n || actions.cols() != n || log_probs.size() != n || values.size() != n ||
      advantages.size() != n || returns.size() != n || bootstrap.size() != n ||
      static_cast<Eigen::Index>(segment_end.size()) != n) {
    throw ValidationError("batch", "arrays differ in length");
  }
  if (n > 0 && !segment_end.back()) throw ValidationError("batch", "last step must end a segment");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values, double bootstrap_value,
                      double gamma, double lambda) {
  if (rewards.size() != values.size()) throw ValidationError("values", "length differs from rewards");
  const std::size_t n = rewards.size();
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_value = bootstrap_value;
  double gae = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    gae = delta + gamma * lambda * gae;
    out.advantages[t] = gae;
    out.returns[t] = gae + values[t];
    next_value = values[t];
  }
  return out;
}

void compute_gae(RolloutBatch& batch, double gamma, double lambda) {
  batch.validate();
  const int n = batch.size();
  int start = 0;
  for (int t = 0; t < n; ++t) {
    if (!batch.segment_end[t]) continue;
    const std::size_t len = static_cast<std::size_t>(t - start + 1);
    const GaeResult g = compute_gae({batch.rewards.data() + start, len}, {batch.values.data() + start, len},
                                    batch.bootstrap[t], gamma, lambda);
    for (std::size_t k = 0; k < len; ++k) {
      batch.advantages[start + static_cast<int>(k)] = g.advantages[k];
      batch.returns[start + static_cast<int>(k)] = g.returns[k];
    }
    start = t + 1;
  }
}

LossTerms ppo_loss(const PolicyNet& net, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions,
                   const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                   const Eigen::VectorXd& returns, double clip_epsilon, const LossWeights& weights,
                   PolicyGrad* grad) {
  const Eigen::Index n = obs.cols();
  if (n == 0) throw ValidationError("obs", "empty minibatch");
  if (obs.rows() != net.obs_dim()) throw ValidationError("obs", "dimension mismatch");
  if (actions.rows() != net.act_dim() || actions.cols() != n || old_log_probs.size() != n ||
      advantages.size() != n || returns.size() != n) {
    throw ValidationError("batch", "arrays differ in length");
  }
  Mlp::Cache pc, vc;
  const Eigen::MatrixXd mean = net.policy.forward(obs, grad ? &pc : nullptr);
  const Eigen::MatrixXd value = net.value.forward(obs, grad ? &vc : nullptr);

  const Eigen::ArrayXd inv_var = (-2.0 * net.log_std.array()).exp();
  const double log_norm = net.log_std.sum() + 0.5 * static_cast<double>(net.act_dim()) * std::log(2.0 * M_PI);
  const Eigen::ArrayXXd diff = (actions - mean).array();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossTerms terms;
  Eigen::MatrixXd mean_grad(mean.rows(), n);
  Eigen::MatrixXd value_grad(1, n);
  Eigen::VectorXd log_std_grad = Eigen::VectorXd::Zero(net.act_dim());
  int clipped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double logp = -0.5 * (diff.col(i).square() * inv_var).sum() - log_norm;
    const double ratio = std::exp(logp - old_log_probs[i]);
    const double a = advantages[i];
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    terms.surrogate += std::min(ratio * a, clipped_ratio * a);
    if (std::abs(ratio - 1.0) > clip_epsilon) ++clipped;
    const bool inactive = (a > 0.0 && ratio > 1.0 + clip_epsilon) || (a < 0.0 && ratio < 1.0 - clip_epsilon);
    // d total / d logp
    const double g = inactive ? 0.0 : -weights.surrogate * ratio * a * inv_n;
    mean_grad.col(i) = g * (diff.col(i) * inv_var).matrix();
    log_std_grad += g * (diff.col(i).square() * inv_var - 1.0).matrix();
    const double err = value(0, i) - returns[i];
    terms.value_loss += err * err;
    value_grad(0, i) = weights.value * 2.0 * err * inv_n;
  }
  terms.surrogate *= inv_n;
  terms.value_loss *= inv_n;
  terms.entropy = gaussian_entropy(net.log_std);
  terms.clip_fraction = clipped * inv_n;
  terms.total = -weights.surrogate * terms.surrogate + weights.value * terms.value_loss -
                weights.entropy * terms.entropy;

  if (grad) {
    net.policy.backward(pc, mean_grad, grad->policy);
    net.value.backward(vc, value_grad, grad->value);
    grad->log_std += log_std_grad - weights.entropy * Eigen::VectorXd::Ones(net.act_dim());
  }
  return terms;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::step(std::vector<double>& params, std::span<const double> grad) {
  if (params.size() != static_cast<std::size_t>(m_.size()) || grad.size() != params.size()) {
    throw ValidationError("params", "size differs from optimizer state");
  }
  ++t_;
  Eigen::Map<Eigen::VectorXd> p(params.data(), m_.size());
  Eigen::Map<const Eigen::VectorXd> g(grad.data(), m_.size());
  m_ = beta1_ * m_ + (1.0 - beta1_) * g;
  v_ = beta2_ * v_ + (1.0 - beta2_) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  p.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

UpdateStats ppo_update(PolicyNet& net, Adam& adam, RolloutBatch& batch, const TrainConfig& cfg,
                       std::mt19937_64& rng) {
  batch.validate();
  const int n = batch.size();
  UpdateStats stats;
  if (n == 0) return stats;

  const double mu = batch.advantages.mean();
  const double sd = std::sqrt((batch.advantages.array() - mu).square().mean());
  const Eigen::VectorXd adv = (batch.advantages.array() - mu) / (sd + 1e-8);

  const PolicyNet saved_net = net;
  const Adam saved_adam = adam;
  const LossWeights weights{1.0, cfg.value_coef, cfg.entropy_coef};
  const int mb = std::min(cfg.minibatch_size, n);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::MatrixXd obs(batch.observations.rows(), mb), act(batch.actions.rows(), mb);
  Eigen::VectorXd old_lp(mb), a(mb), ret(mb);
  int count = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int start = 0; start + mb <= n; start += mb) {
      for (int k = 0; k < mb; ++k) {
        const int i = order[start + k];
        obs.col(k) = batch.observations.col(i);
        act.col(k) = batch.actions.col(i);
        old_lp[k] = batch.log_probs[i];
        a[k] = adv[i];
        ret[k] = batch.returns[i];
      }
      PolicyGrad grad = PolicyGrad::zeros_like(net);
      const LossTerms t = ppo_loss(net, obs, act, old_lp, a, ret, cfg.clip_epsilon, weights, &grad);
      std::vector<double> g = grad.flat();
      const double norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
      if (!std::isfinite(t.total) || !std::isfinite(norm)) {
        net = saved_net;
        adam = saved_adam;
        UpdateStats failed;
        failed.aborted = true;
        return failed;
      }
      if (norm > cfg.max_grad_norm) {
        const double scale = cfg.max_grad_norm / norm;
        for (double& x : g) x *= scale;
      }
      std::vector<double> params = net.flat_params();
      adam.step(params, g);
      net.set_flat_params(params);

      stats.loss += t.total;
      stats.surrogate += t.surrogate;
      stats.value_loss += t.value_loss;
      stats.entropy += t.entropy;
      stats.clip_fraction += t.clip_fraction;
      ++count;
    }
  }
  if (count > 0) {
    stats.loss /= count;
    stats.surrogate /= count;
    stats.value_loss /= count;
    stats.entropy /= count;
    stats.clip_fraction /= count;
  }
  return stats;
}

std::string EpisodeLog::csv_header() { return "update,episode,v_t,return,mean_velocity,mean_power"; }

std::string EpisodeLog::csv_row() const {
  return std::to_string(update) + "," + std::to_string(episode) + "," + format_double(target_velocity) + "," +
         format_double(episode_return) + "," + format_double(mean_velocity) + "," + format_double(mean_power);
}

namespace {

struct EpisodeTracker {
  double target = 0.0;
  double ret = 0.0;
  double power = 0.0;
  int steps = 0;
  Vec2 start{0.0, 0.0};

  void begin(double v_t, const SimState& s) {
    target = v_t;
    ret = power = 0.0;
    steps = 0;
    start = s.com_position;
  }
};

}  // namespace

TrainResult train(const RobotConfig& config, const TrainConfig& cfg, std::uint64_t seed,
                  const TrainCallbacks& callbacks) {
  cfg.validate();
  const RobotModel model = build_robot(config);
  std::mt19937_64 rng(seed);
  TrainResult result;
  result.net = PolicyNet::create(rng, kObservationDim, kActionDim, {kHiddenWidth, kHiddenWidth}, cfg.init_log_std);
  PolicyNet& net = result.net;
  Adam adam(net.parameter_count(), cfg.learning_rate);
  SnakeEnv env(model, cfg.reward, cfg.episode_length, cfg.reward_velocity, cfg.velocity_window);
  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);

  long episode = 0;
  Eigen::VectorXd raw_obs = env.reset(scheduled_velocity(cfg, episode));
  EpisodeTracker ep;
  ep.begin(env.target_velocity(), env.state());

  const int updates = cfg.num_updates();
  const int n = cfg.steps_per_update;
  for (int update = 1; update <= updates; ++update) {
    RolloutBatch batch(net.obs_dim(), net.act_dim(), n);
    for (int t = 0; t < n; ++t) {
      net.normalizer.update(raw_obs);
      const Eigen::VectorXd obs = net.normalizer.normalize(raw_obs);
      const PolicyOutput out = policy_forward_normalized(net, obs);
      const SampledAction s = sample_action(out.mean, net.log_std, rng);
      const SnakeEnv::Transition tr = env.step(s.action);

      batch.observations.col(t) = obs;
      batch.actions.col(t) = s.raw;
      batch.log_probs[t] = s.log_prob;
      batch.values[t] = out.value;
      batch.rewards[t] = tr.reward;
      ep.ret += tr.reward;
      ++ep.steps;
      if (!tr.diverged) ep.power += total_power(tr.info.torques, tr.info.joint_velocities);

      if (tr.done) {
        batch.segment_end[t] = 1;
        batch.bootstrap[t] =
            tr.diverged ? 0.0 : policy_forward_normalized(net, net.normalizer.normalize(tr.obs)).value;
        EpisodeLog log;
        log.update = update;
        log.episode = ++episode;
        log.target_velocity = ep.target;
        log.episode_return = ep.ret;
        log.steps = ep.steps;
        log.diverged = tr.diverged;
        const double duration = ep.steps * model.config().control_dt;
        const double distance = (env.state().com_position - ep.start).norm();
        log.mean_velocity = tr.diverged ? 0.0 : distance / duration;
        log.mean_power = ep.power / ep.steps;
        if (tr.diverged) result.warnings.push_back("episode " + std::to_string(episode) + " diverged");
        result.episodes.push_back(log);
        if (callbacks.on_episode) callbacks.on_episode(log);

        raw_obs = env.reset(scheduled_velocity(cfg, episode));
        ep.begin(env.target_velocity(), env.state());
      } else {
        raw_obs = tr.obs;
      }
    }
    if (!batch.segment_end[n - 1]) {
      batch.segment_end[n - 1] = 1;
      batch.bootstrap[n - 1] = policy_forward_normalized(net, net.normalizer.normalize(raw_obs)).value;
    }
    result.steps += n;

    compute_gae(batch, cfg.gamma, cfg.gae_lambda);
    const UpdateStats stats = ppo_update(net, adam, batch, cfg, rng);
    if (stats.aborted) result.warnings.push_back("update " + std::to_string(update) + " aborted: non-finite loss");
    result.updates.push_back(stats);
    if (callbacks.on_update) callbacks.on_update(update, stats);

    if (!cfg.checkpoint_dir.empty() && (update % cfg.checkpoint_every == 0 || update == updates)) {
      char name[32];
      std::snprintf(name, sizeof name, "policy_%05d.sgl", update);
      save_checkpoint(net, (std::filesystem::path(cfg.checkpoint_dir) / name).string());
    }
  }
  return result;
}

std::vector<double> evaluation_targets() {
  std::vector<double> out;
  for (int k = 6; k <= 50; ++k) out.push_back(k * 0.005);
  return out;
}

EvalResult evaluate_policy_at(const PolicyNet& net, const RobotModel& model, double target_velocity,
                              const RunProtocol& protocol) {
  if (protocol.warmup < 0 || protocol.steps <= protocol.warmup) {
    throw ValidationError("steps", "must exceed warmup");
  }
  const RobotConfig& cfg = model.config();
  Simulator sim(model);
  SimState state = reset(model);
  PowerTrace trace(model.num_joints(), cfg.gear);
  StepInfo info;
  Vec2 window_start = state.com_position;
  for (int i = 0; i < protocol.steps; ++i) {
    if (i == protocol.warmup) window_start = state.com_position;
    const Eigen::VectorXd action = clip_action(policy_forward(net, observe(state, info, target_velocity)).mean);
    if (!action.allFinite()) throw std::runtime_error("policy produced a non-finite action");
    info = sim.step(state, decode_action(action, cfg.joint_limit));
    trace.append(info.torques, info.joint_velocities, info.head_velocity);
  }
  double distance = (state.com_position - window_start).norm();
  if (distance < kStaticDisplacement) distance = 0.0;
  const double duration = (protocol.steps - protocol.warmup) * cfg.control_dt;
  return summarize_run(trace, model, distance, duration, protocol.warmup);
}

std::vector<EvalResult> evaluate_policy(const PolicyNet& net, const RobotModel& model,
                                        const std::vector<double>& targets, const RunProtocol& protocol,
                                        int workers) {
  std::vector<EvalResult> out(targets.size());
  parallel_for(targets.size(), workers,
               [&](std::size_t i) { out[i] = evaluate_policy_at(net, model, targets[i], protocol); });
  return out;
}

}  // namespace sgl::rl
