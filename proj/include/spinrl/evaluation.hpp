#ifndef SPINRL_EVALUATION_HPP_
#define SPINRL_EVALUATION_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "spinrl/environment.hpp"
#include "spinrl/policy.hpp"

namespace spinrl {

// One row per control boundary. q is the control held over [t, t + dt);
// the final row repeats the last applied control.
struct RunRow {
  double t = 0.0;
  double q = 0.0;
  double rho0 = 0.0;
  double theta_s = 0.0;
  double fidelity = 0.0;  // mean-field: 1 - rho0
};

struct RunRecord {
  double dt = 0.0;
  std::vector<RunRow> rows;

  double final_fidelity() const { return rows.back().fidelity; }
  double max_fidelity() const;
  // Earliest t with fidelity >= threshold.
  std::optional<double> first_time_reaching(double threshold) const;
  // Throws std::logic_error unless t starts at 0 and increases by dt.
  void validate(int expected_steps) const;
};

// Maps the live environment to an action. Called once per step, before it.
using Controller = std::function<double(const Environment&)>;

// Drives an already-reset environment to the end of its horizon.
RunRecord run_controller(Environment& env, const Controller& controller);

// As run_controller, but the callback performs the step itself.
RunRecord run_steps(Environment& env, const std::function<void(Environment&)>& step_once);

Controller policy_controller(const PolicyParams& policy, bool deterministic, std::uint64_t seed);

// Deterministic mode applies the Gaussian mean; stochastic mode samples
// from a stream seeded with seed. The environment must already be reset.
RunRecord rollout(Environment& env, const PolicyParams& policy, bool deterministic,
                  std::uint64_t seed = 0);

struct PolicyMap {
  std::vector<double> theta_nodes;  // [0, 2pi), spacing 2pi / n_theta
  std::vector<double> rho_nodes;    // [0, 1] inclusive
  Eigen::MatrixXd mean_action;      // n_rho x n_theta
};

PolicyMap policy_map(const PolicyParams& policy, int n_theta = 101, int n_rho = 101);

struct NoiseReport {
  double sigma = 0.0;
  int n_samples = 0;
  std::vector<double> times;
  std::vector<double> mean_fidelity;
  std::vector<double> std_fidelity;  // unbiased (n - 1); 0 when n = 1
  // fidelity[sample][row]
  std::vector<std::vector<double>> trajectories;

  double final_mean() const { return mean_fidelity.back(); }
  double final_std() const { return std_fidelity.back(); }
};

// Each sample clones env (already reset) and applies
// clip(mu_t + sigma * eta_t, q_min, q_max) with mu_t the deterministic
// policy output and eta_t standard normal, drawn from split_seed(seed,
// "noise", sample).
NoiseReport noise_eval(const Environment& env, const PolicyParams& policy, double sigma,
                       int n_samples, std::uint64_t seed, int workers = 1);

struct GeneralizationRow {
  int n_atoms = 0;
  double final_fidelity = 0.0;
  double max_fidelity = 0.0;
};

// Deterministic rollout from |0, N, 0> for every N, rebuilding the quantum
// environment from base with only n_atoms changed.
std::vector<GeneralizationRow> generalize(const PolicyParams& policy, const EnvConfig& base,
                                          const std::vector<int>& n_list, int workers = 1);

}  // namespace spinrl

#endif  // SPINRL_EVALUATION_HPP_
