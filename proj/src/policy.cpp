#include "spinrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinrl {

namespace {

constexpr double kHiddenGain = std::numbers::sqrt2;
constexpr double kActorOutputGain = 0.01;
constexpr double kCriticOutputGain = 1.0;

}  // namespace

Eigen::VectorXd PolicyParams::actor_vector() const {
  Eigen::VectorXd v(actor.num_params() + 1);
  v.head(actor.num_params()) = actor.params();
  v(actor.num_params()) = log_std;
  return v;
}

void PolicyParams::set_actor_vector(const Eigen::VectorXd& v) {
  if (v.size() != actor.num_params() + 1) {
    throw std::invalid_argument("set_actor_vector: size mismatch");
  }
  actor.params() = v.head(actor.num_params());
  log_std = v(actor.num_params());
}

PolicyParams make_policy(int obs_dim, const std::vector<int>& hidden_sizes, double q_min,
                         double q_max, Rng& rng) {
  if (!(q_min < q_max)) throw std::invalid_argument("make_policy: q_min must be < q_max");
  PolicyParams p;
  p.actor = Mlp(obs_dim, hidden_sizes, 1, OutputActivation::kTanh);
  p.critic = Mlp(obs_dim, hidden_sizes, 1, OutputActivation::kLinear);
  p.actor.init_orthogonal(rng, kHiddenGain, kActorOutputGain);
  p.critic.init_orthogonal(rng, kHiddenGain, kCriticOutputGain);
  p.log_std = 0.0;
  p.q_min = q_min;
  p.q_max = q_max;
  return p;
}

double gaussian_logprob(double x, double mean, double log_std) {
  const double z = (x - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - 0.5 * std::log(2.0 * std::numbers::pi);
}

double action_mean(const PolicyParams& p, const Eigen::VectorXd& obs) {
  return p.q_center() + p.q_half_range() * p.actor.forward(obs)(0);
}

Eigen::VectorXd action_mean_batch(const PolicyParams& p, const Eigen::MatrixXd& obs) {
  const Eigen::MatrixXd y = p.actor.forward_batch(obs);
  return (p.q_center() + p.q_half_range() * y.row(0).array()).matrix().transpose();
}

double state_value(const PolicyParams& p, const Eigen::VectorXd& obs) {
  return p.critic.forward(obs)(0);
}

PolicySample policy_sample(const PolicyParams& p, const Eigen::VectorXd& obs, Rng& rng) {
  const double mean = action_mean(p, obs);
  std::normal_distribution<double> normal(0.0, 1.0);
  PolicySample s;
  s.raw_action = mean + std::exp(p.log_std) * normal(rng);
  s.logprob = gaussian_logprob(s.raw_action, mean, p.log_std);
  s.action = std::clamp(s.raw_action, p.q_min, p.q_max);
  return s;
}

Eigen::VectorXd logprob_gradient(const PolicyParams& p, const Eigen::VectorXd& obs,
                                 double raw_action) {
  Mlp::Tape tape;
  const Eigen::MatrixXd y = p.actor.forward_batch(obs, &tape);
  const double mean = p.q_center() + p.q_half_range() * y(0, 0);
  const double inv_var = std::exp(-2.0 * p.log_std);
  const double diff = raw_action - mean;
  Eigen::MatrixXd grad_out(1, 1);
  grad_out(0, 0) = diff * inv_var * p.q_half_range();
  Eigen::VectorXd g(p.actor.num_params() + 1);
  g.head(p.actor.num_params()) = p.actor.backward(tape, grad_out);
  g(p.actor.num_params()) = diff * diff * inv_var - 1.0;
  return g;
}

}  // namespace spinrl
