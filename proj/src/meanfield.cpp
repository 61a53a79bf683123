#include "spinrl/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinrl {

namespace {

double clamp_fraction(double rho) {
  if (!std::isfinite(rho)) throw std::runtime_error("rho0 became non-finite");
  return std::clamp(rho, 0.0, 1.0);
}

PhaseRates rates_unwrapped(double rho0, double theta, double q, double c2) {
  return {2.0 * c2 * rho0 * (1.0 - rho0) * std::sin(theta),
          -2.0 * q + 2.0 * c2 * (1.0 - 2.0 * rho0) * (1.0 + std::cos(theta))};
}

}  // namespace

void MeanFieldConfig::validate() const {
  if (!(c2 < 0.0)) throw std::invalid_argument("c2: must be negative (ferromagnetic)");
  if (!(q_min < q_max)) throw std::invalid_argument("q_min/q_max: require q_min < q_max");
  if (!(dt > 0.0)) throw std::invalid_argument("dt: must be positive");
  if (steps_per_episode < 1) throw std::invalid_argument("steps_per_episode: must be >= 1");
  if (substeps < 1) throw std::invalid_argument("substeps: must be >= 1");
}

PhaseRates mf_derivatives(const PhaseState& s, double q, double c2) {
  return rates_unwrapped(s.rho0, s.theta_s, q, c2);
}

double wrap_phase(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

PhaseState rk4_step(const PhaseState& s, double q, double dt, double c2) {
  // theta is integrated unwrapped inside the step and wrapped once at the end.
  const double r = s.rho0;
  const double t = s.theta_s;
  const PhaseRates k1 = rates_unwrapped(r, t, q, c2);
  const PhaseRates k2 =
      rates_unwrapped(r + 0.5 * dt * k1.drho0, t + 0.5 * dt * k1.dtheta_s, q, c2);
  const PhaseRates k3 =
      rates_unwrapped(r + 0.5 * dt * k2.drho0, t + 0.5 * dt * k2.dtheta_s, q, c2);
  const PhaseRates k4 = rates_unwrapped(r + dt * k3.drho0, t + dt * k3.dtheta_s, q, c2);
  PhaseState out;
  out.rho0 = clamp_fraction(
      r + dt / 6.0 * (k1.drho0 + 2.0 * k2.drho0 + 2.0 * k3.drho0 + k4.drho0));
  out.theta_s = wrap_phase(
      t + dt / 6.0 * (k1.dtheta_s + 2.0 * k2.dtheta_s + 2.0 * k3.dtheta_s + k4.dtheta_s));
  return out;
}

PhaseState advance(const PhaseState& s, double q, const MeanFieldConfig& cfg) {
  const double h = cfg.dt / cfg.substeps;
  PhaseState cur = s;
  for (int i = 0; i < cfg.substeps; ++i) cur = rk4_step(cur, q, h, cfg.c2);
  return cur;
}

PhaseState advance_feedback(const PhaseState& s, const FeedbackLaw& law,
                            const MeanFieldConfig& cfg) {
  const double h = cfg.dt / cfg.substeps;
  auto rates = [&](double r, double t) {
    const double q = std::clamp(law(PhaseState{std::clamp(r, 0.0, 1.0), t}), cfg.q_min, cfg.q_max);
    return rates_unwrapped(r, t, q, cfg.c2);
  };
  PhaseState cur = s;
  for (int i = 0; i < cfg.substeps; ++i) {
    const double r = cur.rho0;
    const double t = cur.theta_s;
    const PhaseRates k1 = rates(r, t);
    const PhaseRates k2 = rates(r + 0.5 * h * k1.drho0, t + 0.5 * h * k1.dtheta_s);
    const PhaseRates k3 = rates(r + 0.5 * h * k2.drho0, t + 0.5 * h * k2.dtheta_s);
    const PhaseRates k4 = rates(r + h * k3.drho0, t + h * k3.dtheta_s);
    cur.rho0 = clamp_fraction(r + h / 6.0 * (k1.drho0 + 2.0 * k2.drho0 + 2.0 * k3.drho0 + k4.drho0));
    cur.theta_s = wrap_phase(
        t + h / 6.0 * (k1.dtheta_s + 2.0 * k2.dtheta_s + 2.0 * k3.dtheta_s + k4.dtheta_s));
  }
  return cur;
}

double analytic_optimal_q(const PhaseState& s, const MeanFieldConfig& cfg) {
  return std::clamp(cfg.c2 * (1.0 - 2.0 * s.rho0), cfg.q_min, cfg.q_max);
}

double logistic_oracle(double rho0_init, double t, double c2) {
  const double e = std::exp(2.0 * c2 * t);
  return rho0_init * e / (1.0 - rho0_init + rho0_init * e);
}

PhaseState advance_pinned(const PhaseState& s, const MeanFieldConfig& cfg) {
  return advance_feedback(s, [&cfg](const PhaseState& x) { return analytic_optimal_q(x, cfg); }, cfg);
}

}  // namespace spinrl
