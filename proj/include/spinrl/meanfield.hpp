#ifndef SPINRL_MEANFIELD_HPP_
#define SPINRL_MEANFIELD_HPP_

#include <functional>
#include <numbers>

namespace spinrl {

// Point on the classical F_z = 0 phase space of the spin-1 condensate.
// rho0 is the m_F = 0 population fraction, theta_s the relative phase
// chi_+ + chi_- - 2 chi_0, kept in [0, 2pi).
struct PhaseState {
  double rho0 = 1.0;
  double theta_s = 0.0;
};

struct MeanFieldConfig {
  double c2 = -1.0;
  double q_min = -6.0;
  double q_max = 6.0;
  double dt = 0.05;
  int steps_per_episode = 100;
  // RK4 substeps per control interval.
  int substeps = 5;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct PhaseRates {
  double drho0 = 0.0;
  double dtheta_s = 0.0;
};

// Right-hand side of the mean-field pendulum equations (hbar = 1).
PhaseRates mf_derivatives(const PhaseState& s, double q, double c2);

// Wraps an angle into [0, 2pi).
double wrap_phase(double theta);

// One classical RK4 step with q held constant. rho0 is clamped to [0, 1]
// and theta_s wrapped. Negative dt integrates backwards in time.
PhaseState rk4_step(const PhaseState& s, double q, double dt, double c2);

// Advances one control interval of cfg.dt using cfg.substeps RK4 substeps.
PhaseState advance(const PhaseState& s, double q, const MeanFieldConfig& cfg);

// Closed-loop control: q is re-evaluated from the state at every RK4 stage
// and clipped to [q_min, q_max].
using FeedbackLaw = std::function<double(const PhaseState&)>;
PhaseState advance_feedback(const PhaseState& s, const FeedbackLaw& law, const MeanFieldConfig& cfg);

// Control that pins theta_s at pi/2, where the decay of rho0 is fastest:
// q = c2 (1 - 2 rho0), clipped to [q_min, q_max]. Holding this value over a
// whole interval does not keep theta_s pinned (the orbit is unstable); use
// advance_pinned for that.
double analytic_optimal_q(const PhaseState& s, const MeanFieldConfig& cfg);

// advance_feedback with analytic_optimal_q.
PhaseState advance_pinned(const PhaseState& s, const MeanFieldConfig& cfg);

// rho0(t) for theta_s held at pi/2: the logistic solution of the rho0 equation.
double logistic_oracle(double rho0_init, double t, double c2);

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace spinrl

#endif  // SPINRL_MEANFIELD_HPP_
