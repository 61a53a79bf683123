#ifndef SPINRL_BASELINES_HPP_
#define SPINRL_BASELINES_HPP_

#include <vector>

#include "spinrl/environment.hpp"
#include "spinrl/evaluation.hpp"

namespace spinrl {

// n evenly spaced points over [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, int n);

// Greedy control: each step tries every grid value on a clone of the
// environment and keeps the one with the largest one-step increase of
// fidelity (raw difference, whatever reward the environment is configured
// with). Ties go to the smallest |q|, then the smaller q. env must be reset.
Controller greedy_controller(std::vector<double> q_grid);
RunRecord greedy_rollout(Environment& env, const std::vector<double>& q_grid);

struct RampProtocol {
  double q_initial = 0.0;
  double q_final = 0.0;
  double ramp_time = 0.0;
};

// q(tau) = q_i + (q_f - q_i) min(tau / t_ramp, 1), sampled at the midpoint
// of each control interval.
double ramp_value(const RampProtocol& ramp, double tau);
Controller ramp_controller(const RampProtocol& ramp);

struct RampSearchResult {
  RampProtocol best;
  double final_fidelity = 0.0;
  RunRecord record;
  int evaluated = 0;
};

// Exhaustive search maximizing final fidelity from the current state of
// env. Equal scores resolve to the lexicographically smallest
// (q_i, q_f, t_ramp), so the result does not depend on grid order.
RampSearchResult ramp_search(const Environment& env, const std::vector<double>& qi_grid,
                             const std::vector<double>& qf_grid,
                             const std::vector<double>& ramp_time_grid, int workers = 1);

// Default grids: 25 x 25 over [q_min, q_max] and 10 ramp times up to the horizon.
RampSearchResult ramp_search(const Environment& env, int workers = 1);

// Mean-field optimum. Bangs at whichever bound reaches theta_s = pi/2
// sooner (landing exactly on pi/2 on the final bang step), then applies
// analytic_optimal_q. Throws std::invalid_argument for a non-mean-field env.
// The controller holds each value for a whole interval; the rollout instead
// applies the law as continuous feedback once theta_s reaches pi/2.
Controller analytic_meanfield_controller();
RunRecord analytic_meanfield_rollout(Environment& env);

RunRecord constant_q_rollout(Environment& env, double q);

}  // namespace spinrl

#endif  // SPINRL_BASELINES_HPP_
