#include "spinrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "spinrl/rng.hpp"

namespace spinrl {

void TrainConfig::validate() const {
  if (hidden_sizes.empty()) throw std::invalid_argument("hidden_sizes: must be non-empty");
  for (int h : hidden_sizes) {
    if (h < 1) throw std::invalid_argument("hidden_sizes: entries must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma: must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("gae_lambda: must lie in [0, 1]");
  }
  if (!(lr_actor > 0.0)) throw std::invalid_argument("lr_actor: must be positive");
  if (!(lr_critic > 0.0)) throw std::invalid_argument("lr_critic: must be positive");
  if (!(target_kl >= 0.0)) throw std::invalid_argument("target_kl: must be >= 0");
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) {
    throw std::invalid_argument("clip_ratio: must lie in (0, 1)");
  }
  if (epochs_per_update < 1) throw std::invalid_argument("epochs_per_update: must be >= 1");
  if (episodes_per_epoch < 1) throw std::invalid_argument("episodes_per_epoch: must be >= 1");
  if (total_epochs < 0) throw std::invalid_argument("total_epochs: must be >= 0");
  if (workers < 1) throw std::invalid_argument("workers: must be >= 1");
}

TrainConfig default_train_config(SystemKind system, int n_atoms) {
  TrainConfig cfg;
  if (system == SystemKind::kQuantum) {
    cfg.hidden_sizes = {64, 32};
    cfg.total_epochs = n_atoms > 2 ? 1000 : 200;
  }
  return cfg;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda) {
  if (values.size() != rewards.size() + 1) {
    throw std::invalid_argument("compute_gae: values must have one more entry than rewards");
  }
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double delta = rewards[i] + gamma * values[i + 1] - values[i];
    running = delta + gamma * lambda * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double std_dev = std::sqrt(var / n);
  for (double& a : advantages) a = (a - mean) / (std_dev + 1e-8);
}

void TransitionBuffer::add(const Observation& obs, double raw_action, double logprob,
                           double reward, double value) {
  obs_.push_back(obs);
  actions_.push_back(raw_action);
  logprobs_.push_back(logprob);
  rewards_.push_back(reward);
  values_.push_back(value);
}

void TransitionBuffer::finish_episode(double bootstrap_value, double gamma, double lambda) {
  const std::size_t end = rewards_.size();
  if (end == open_start_) throw std::logic_error("finish_episode: no open episode");
  std::vector<double> vals(values_.begin() + static_cast<std::ptrdiff_t>(open_start_),
                           values_.end());
  vals.push_back(bootstrap_value);
  const std::span<const double> rews(rewards_.data() + open_start_, end - open_start_);
  GaeResult g = compute_gae(rews, vals, gamma, lambda);
  advantages_.insert(advantages_.end(), g.advantages.begin(), g.advantages.end());
  returns_.insert(returns_.end(), g.returns.begin(), g.returns.end());
  episode_ends_.push_back(end);
  open_start_ = end;
}

void TransitionBuffer::append(const TransitionBuffer& other) {
  if (has_open_episode() || other.has_open_episode()) {
    throw std::logic_error("append: both buffers must have only finished episodes");
  }
  const std::size_t offset = size();
  obs_.insert(obs_.end(), other.obs_.begin(), other.obs_.end());
  actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
  logprobs_.insert(logprobs_.end(), other.logprobs_.begin(), other.logprobs_.end());
  rewards_.insert(rewards_.end(), other.rewards_.begin(), other.rewards_.end());
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  advantages_.insert(advantages_.end(), other.advantages_.begin(), other.advantages_.end());
  returns_.insert(returns_.end(), other.returns_.begin(), other.returns_.end());
  for (std::size_t e : other.episode_ends_) episode_ends_.push_back(e + offset);
  open_start_ = size();
}

Eigen::MatrixXd TransitionBuffer::observation_matrix() const {
  Eigen::MatrixXd m(kObservationSize, static_cast<Eigen::Index>(obs_.size()));
  for (std::size_t j = 0; j < obs_.size(); ++j) {
    for (int i = 0; i < kObservationSize; ++i) m(i, static_cast<Eigen::Index>(j)) = obs_[j].features[i];
  }
  return m;
}

UpdateBatch UpdateBatch::from_buffer(const TransitionBuffer& buffer) {
  auto to_vec = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };
  std::vector<double> adv = buffer.advantages();
  normalize_advantages(adv);
  UpdateBatch b;
  b.obs = buffer.observation_matrix();
  b.raw_actions = to_vec(buffer.raw_actions());
  b.logprob_old = to_vec(buffer.logprobs());
  b.advantages = to_vec(adv);
  b.returns = to_vec(buffer.returns());
  return b;
}

ActorLoss actor_loss(const PolicyParams& p, const UpdateBatch& batch, double clip_ratio) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("actor_loss: empty batch");
  Mlp::Tape tape;
  const Eigen::MatrixXd y = p.actor.forward_batch(batch.obs, &tape);
  const double half = p.q_half_range();
  const double inv_var = std::exp(-2.0 * p.log_std);
  const double log_norm = p.log_std + 0.5 * std::log(2.0 * std::numbers::pi);

  ActorLoss out;
  Eigen::MatrixXd grad_out(1, n);
  double grad_log_std = 0.0;
  double clipped_sum = 0.0;
  double unclipped_sum = 0.0;
  double kl_sum = 0.0;
  int clipped_count = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mean = p.q_center() + half * y(0, j);
    const double diff = batch.raw_actions(j) - mean;
    const double logp = -0.5 * diff * diff * inv_var - log_norm;
    const double ratio = std::exp(logp - batch.logprob_old(j));
    const double adv = batch.advantages(j);
    const double plain = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio) * adv;
    unclipped_sum += plain;
    kl_sum += batch.logprob_old(j) - logp;
    // d(-min(plain, clipped))/d logp; the clipped branch is flat.
    double g_logp = 0.0;
    if (plain <= clipped) {
      clipped_sum += plain;
      g_logp = -plain / static_cast<double>(n);
    } else {
      clipped_sum += clipped;
      ++clipped_count;
    }
    grad_out(0, j) = g_logp * diff * inv_var * half;
    grad_log_std += g_logp * (diff * diff * inv_var - 1.0);
  }
  out.loss = -clipped_sum / static_cast<double>(n);
  out.unclipped = -unclipped_sum / static_cast<double>(n);
  out.approx_kl = kl_sum / static_cast<double>(n);
  out.clip_fraction = static_cast<double>(clipped_count) / static_cast<double>(n);
  out.gradient.resize(p.actor.num_params() + 1);
  out.gradient.head(p.actor.num_params()) = p.actor.backward(tape, grad_out);
  out.gradient(p.actor.num_params()) = grad_log_std;
  return out;
}

CriticLoss critic_loss(const PolicyParams& p, const UpdateBatch& batch) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("critic_loss: empty batch");
  Mlp::Tape tape;
  const Eigen::MatrixXd v = p.critic.forward_batch(batch.obs, &tape);
  const Eigen::RowVectorXd err = v.row(0) - batch.returns.transpose();
  CriticLoss out;
  out.loss = err.squaredNorm() / static_cast<double>(n);
  const Eigen::MatrixXd grad_out = (2.0 / static_cast<double>(n)) * err;
  out.gradient = p.critic.backward(tape, grad_out);
  return out;
}

Optimizers make_optimizers(const PolicyParams& p, const TrainConfig& cfg) {
  return {Adam(p.actor.num_params() + 1, cfg.lr_actor),
          Adam(p.critic.num_params(), cfg.lr_critic)};
}

UpdateStats ppo_update(const TransitionBuffer& buffer, PolicyParams& params, Optimizers& opt,
                       const TrainConfig& cfg) {
  if (buffer.episodes() == 0 || buffer.size() == 0) {
    throw std::invalid_argument("ppo_update: buffer holds no finished episode");
  }
  if (buffer.has_open_episode()) {
    throw std::invalid_argument("ppo_update: buffer has an unfinished episode");
  }
  const UpdateBatch batch = UpdateBatch::from_buffer(buffer);
  UpdateStats stats;

  for (int i = 0; i < cfg.epochs_per_update; ++i) {
    ActorLoss loss = actor_loss(params, batch, cfg.clip_ratio);
    if (i == 0) stats.policy_loss = loss.loss;
    stats.approx_kl = loss.approx_kl;
    stats.clip_fraction = loss.clip_fraction;
    if (loss.approx_kl > cfg.target_kl) {
      stats.early_stopped = true;
      break;
    }
    Eigen::VectorXd v = params.actor_vector();
    opt.actor.step(v, loss.gradient);
    v(v.size() - 1) = std::clamp(v(v.size() - 1), kLogStdMin, kLogStdMax);
    params.set_actor_vector(v);
    ++stats.policy_iterations;
  }

  for (int i = 0; i < cfg.epochs_per_update; ++i) {
    CriticLoss loss = critic_loss(params, batch);
    if (i == 0) stats.value_loss = loss.loss;
    opt.critic.step(params.critic.params(), loss.gradient);
  }
  return stats;
}

double collect_episode(Environment& env, const PolicyParams& params, InitMode init,
                       std::uint64_t reset_seed, std::uint64_t sample_seed, double gamma,
                       double lambda, TransitionBuffer& buffer, double* final_progress) {
  Rng rng(sample_seed);
  Observation obs = env.reset(init, reset_seed);
  double total = 0.0;
  while (!env.done()) {
    const Eigen::VectorXd x = obs.vector();
    const PolicySample s = policy_sample(params, x, rng);
    const double value = state_value(params, x);
    const StepResult r = env.step(s.action);
    buffer.add(obs, s.raw_action, s.logprob, r.reward, value);
    total += r.reward;
    obs = r.obs;
  }
  // The horizon ends the control problem, so the tail is not bootstrapped.
  buffer.finish_episode(0.0, gamma, lambda);
  if (final_progress) *final_progress = env.progress();
  return total;
}

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, InitMode init,
                  const std::function<void(const EpochStats&, const PolicyParams&)>& on_epoch) {
  cfg.validate();
  std::unique_ptr<Environment> probe = make_env();
  const EnvConfig& env_cfg = probe->config();
  Rng init_rng(split_seed(cfg.seed, "init"));
  TrainResult result;
  result.params =
      make_policy(kObservationSize, cfg.hidden_sizes, env_cfg.q_min, env_cfg.q_max, init_rng);
  Optimizers opt = make_optimizers(result.params, cfg);

  const int n_ep = cfg.episodes_per_epoch;
  const int n_workers = std::min(cfg.workers, n_ep);
  std::vector<std::unique_ptr<Environment>> envs;
  envs.push_back(std::move(probe));
  for (int w = 1; w < n_workers; ++w) envs.push_back(make_env());

  std::vector<TransitionBuffer> episode_buffers(static_cast<std::size_t>(n_ep));
  std::vector<double> returns(static_cast<std::size_t>(n_ep));
  std::vector<double> finals(static_cast<std::size_t>(n_ep));

  for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
    auto run_range = [&](int worker) {
      for (int e = worker; e < n_ep; e += n_workers) {
        const auto idx = static_cast<std::uint64_t>(epoch) * n_ep + e;
        auto& buf = episode_buffers[static_cast<std::size_t>(e)];
        buf = TransitionBuffer{};
        returns[static_cast<std::size_t>(e)] = collect_episode(
            *envs[static_cast<std::size_t>(worker)], result.params, init,
            split_seed(cfg.seed, "reset", idx), split_seed(cfg.seed, "rollout", idx), cfg.gamma,
            cfg.gae_lambda, buf, &finals[static_cast<std::size_t>(e)]);
      }
    };
    if (n_workers == 1) {
      run_range(0);
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_range, w);
    }
    TransitionBuffer buffer;
    for (const auto& b : episode_buffers) buffer.append(b);

    const UpdateStats u = ppo_update(buffer, result.params, opt, cfg);
    EpochStats s;
    s.epoch = epoch;
    s.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n_ep;
    s.mean_final_fidelity = std::accumulate(finals.begin(), finals.end(), 0.0) / n_ep;
    s.approx_kl = u.approx_kl;
    s.policy_loss = u.policy_loss;
    s.value_loss = u.value_loss;
    s.policy_iterations = u.policy_iterations;
    result.curve.push_back(s);
    if (on_epoch) on_epoch(s, result.params);
  }
  return result;
}

}  // namespace spinrl
