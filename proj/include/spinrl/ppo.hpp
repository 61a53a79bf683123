#ifndef SPINRL_PPO_HPP_
#define SPINRL_PPO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "spinrl/adam.hpp"
#include "spinrl/environment.hpp"
#include "spinrl/policy.hpp"

namespace spinrl {

struct TrainConfig {
  std::vector<int> hidden_sizes{32, 16};
  double gamma = 0.999;
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double target_kl = 0.01;
  double clip_ratio = 0.2;
  double gae_lambda = 0.97;
  int epochs_per_update = 80;
  int episodes_per_epoch = 4;
  int total_epochs = 200;
  std::uint64_t seed = 0;
  // Rollout threads. Episode seeds do not depend on the worker count.
  int workers = 1;

  void validate() const;
};

// Mean-field: hidden [32, 16], 200 epochs. Quantum: hidden [64, 32], 200
// epochs for N = 2 and 1000 epochs for larger N.
TrainConfig default_train_config(SystemKind system, int n_atoms = 2);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Raw (unnormalized) GAE(lambda). values carries one extra bootstrap entry.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      double gamma, double lambda);

// Shifts and scales to zero mean, unit variance. Leaves constant input
// centered at zero.
void normalize_advantages(std::vector<double>& advantages);

class TransitionBuffer {
 public:
  void add(const Observation& obs, double raw_action, double logprob, double reward,
           double value);
  // Closes the open episode, computing its advantages and returns.
  void finish_episode(double bootstrap_value, double gamma, double lambda);
  // Appends all finished episodes of other.
  void append(const TransitionBuffer& other);

  std::size_t size() const { return rewards_.size(); }
  std::size_t episodes() const { return episode_ends_.size(); }
  bool has_open_episode() const { return open_start_ < rewards_.size(); }

  Eigen::MatrixXd observation_matrix() const;
  const std::vector<double>& raw_actions() const { return actions_; }
  const std::vector<double>& logprobs() const { return logprobs_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& advantages() const { return advantages_; }
  const std::vector<double>& returns() const { return returns_; }

 private:
  std::vector<Observation> obs_;
  std::vector<double> actions_;
  std::vector<double> logprobs_;
  std::vector<double> rewards_;
  std::vector<double> values_;
  std::vector<double> advantages_;
  std::vector<double> returns_;
  std::vector<std::size_t> episode_ends_;
  std::size_t open_start_ = 0;
};

// Flat batch for one update. Advantages are already normalized.
struct UpdateBatch {
  Eigen::MatrixXd obs;  // kObservationSize x B
  Eigen::VectorXd raw_actions;
  Eigen::VectorXd logprob_old;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  static UpdateBatch from_buffer(const TransitionBuffer& buffer);
  Eigen::Index size() const { return raw_actions.size(); }
};

struct ActorLoss {
  double loss = 0.0;          // negative clipped surrogate
  double unclipped = 0.0;     // negative unclipped surrogate
  double approx_kl = 0.0;     // mean(logp_old - logp)
  double clip_fraction = 0.0;
  Eigen::VectorXd gradient;   // w.r.t. PolicyParams::actor_vector()
};

ActorLoss actor_loss(const PolicyParams& p, const UpdateBatch& batch, double clip_ratio);

struct CriticLoss {
  double loss = 0.0;  // mean squared error
  Eigen::VectorXd gradient;
};

CriticLoss critic_loss(const PolicyParams& p, const UpdateBatch& batch);

struct Optimizers {
  Adam actor;
  Adam critic;
};

Optimizers make_optimizers(const PolicyParams& p, const TrainConfig& cfg);

struct UpdateStats {
  double policy_loss = 0.0;  // before the update
  double value_loss = 0.0;   // before the update
  double approx_kl = 0.0;    // last measured
  double clip_fraction = 0.0;
  int policy_iterations = 0;  // gradient steps taken on the actor
  bool early_stopped = false;
};

// Clipped-surrogate actor steps with early stop once KL exceeds target_kl,
// then epochs_per_update critic regression steps. Throws on an empty buffer
// or an unfinished episode.
UpdateStats ppo_update(const TransitionBuffer& buffer, PolicyParams& params, Optimizers& opt,
                       const TrainConfig& cfg);

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

struct EpochStats {
  int epoch = 0;
  double mean_return = 0.0;  // undiscounted
  double mean_final_fidelity = 0.0;
  double approx_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  int policy_iterations = 0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<EpochStats> curve;
};

// Episode e of epoch k resets and samples from seeds split off cfg.seed,
// so results do not depend on cfg.workers.
TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, InitMode init,
                  const std::function<void(const EpochStats&, const PolicyParams&)>& on_epoch = {});

// Collects one episode with the stochastic policy into buffer.
double collect_episode(Environment& env, const PolicyParams& params, InitMode init,
                       std::uint64_t reset_seed, std::uint64_t sample_seed, double gamma,
                       double lambda, TransitionBuffer& buffer, double* final_progress);

}  // namespace spinrl

#endif  // SPINRL_PPO_HPP_
