#ifndef SPINRL_POLICY_HPP_
#define SPINRL_POLICY_HPP_

#include <Eigen/Dense>

#include <vector>

#include "spinrl/mlp.hpp"
#include "spinrl/rng.hpp"

namespace spinrl {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Gaussian actor over the bounded control plus a state-value critic.
// The actor's tanh output is mapped affinely onto [q_min, q_max].
struct PolicyParams {
  Mlp actor;
  double log_std = 0.0;
  Mlp critic;
  double q_min = -6.0;
  double q_max = 6.0;

  int obs_dim() const { return actor.input_size(); }
  double q_center() const { return 0.5 * (q_max + q_min); }
  double q_half_range() const { return 0.5 * (q_max - q_min); }

  // Actor parameters followed by log_std, the vector the actor optimizer sees.
  Eigen::VectorXd actor_vector() const;
  void set_actor_vector(const Eigen::VectorXd& v);
};

PolicyParams make_policy(int obs_dim, const std::vector<int>& hidden_sizes, double q_min,
                         double q_max, Rng& rng);

struct PolicySample {
  double action = 0.0;      // clipped to [q_min, q_max]
  double raw_action = 0.0;  // pre-clip Gaussian draw
  double logprob = 0.0;     // log-density of raw_action
};

double gaussian_logprob(double x, double mean, double log_std);

double action_mean(const PolicyParams& p, const Eigen::VectorXd& obs);
Eigen::VectorXd action_mean_batch(const PolicyParams& p, const Eigen::MatrixXd& obs);

double state_value(const PolicyParams& p, const Eigen::VectorXd& obs);

PolicySample policy_sample(const PolicyParams& p, const Eigen::VectorXd& obs, Rng& rng);

// d logprob(raw_action | obs) / d actor_vector().
Eigen::VectorXd logprob_gradient(const PolicyParams& p, const Eigen::VectorXd& obs,
                                 double raw_action);

}  // namespace spinrl

#endif  // SPINRL_POLICY_HPP_
