#include "spinrl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinrl/rng.hpp"

namespace spinrl {

std::string to_string(SystemKind s) {
  return s == SystemKind::kMeanField ? "meanfield" : "quantum";
}

std::string to_string(RewardForm r) { return r == RewardForm::kDelta ? "delta" : "log"; }

std::string to_string(InitMode m) { return m == InitMode::kFixed ? "fixed" : "random"; }

SystemKind parse_system(const std::string& s) {
  if (s == "meanfield") return SystemKind::kMeanField;
  if (s == "quantum") return SystemKind::kQuantum;
  throw std::invalid_argument("system: expected meanfield|quantum, got '" + s + "'");
}

RewardForm parse_reward(const std::string& s) {
  if (s == "delta") return RewardForm::kDelta;
  if (s == "log") return RewardForm::kLog;
  throw std::invalid_argument("reward: expected delta|log, got '" + s + "'");
}

InitMode parse_init(const std::string& s) {
  if (s == "fixed") return InitMode::kFixed;
  if (s == "random") return InitMode::kRandom;
  throw std::invalid_argument("init: expected fixed|random, got '" + s + "'");
}

void EnvConfig::validate() const {
  if (!std::isfinite(c2)) throw std::invalid_argument("c2: must be finite");
  if (system == SystemKind::kMeanField && !(c2 < 0.0)) {
    throw std::invalid_argument("c2: mean-field system requires c2 < 0");
  }
  if (system == SystemKind::kQuantum) require_even_atoms(n_atoms);
  if (!(q_min < q_max) || !std::isfinite(q_min) || !std::isfinite(q_max)) {
    throw std::invalid_argument("q_min/q_max: require finite q_min < q_max");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt: must be positive");
  if (steps < 1) throw std::invalid_argument("steps: must be >= 1");
}

EnvConfig default_env_config(SystemKind system, int n_atoms) {
  EnvConfig cfg;
  cfg.system = system;
  cfg.n_atoms = n_atoms;
  if (system == SystemKind::kQuantum) {
    cfg.dt = 0.1;
    cfg.steps = 200;
  }
  return cfg;
}

Eigen::VectorXd Observation::vector() const {
  return Eigen::Map<const Eigen::VectorXd>(features.data(), kObservationSize);
}

Observation make_observation(double rho0, double theta_s) {
  return Observation{{rho0, std::cos(theta_s), std::sin(theta_s)}};
}

double reward_delta(double f_prev, double f_cur) { return f_cur - f_prev; }

double reward_log(double f_prev, double f_cur) {
  const double prev = std::max(1.0 - f_prev, kInfidelityFloor);
  const double cur = std::max(1.0 - f_cur, kInfidelityFloor);
  return -std::log(cur / prev);
}

double apply_reward(RewardForm form, double f_prev, double f_cur) {
  return form == RewardForm::kDelta ? reward_delta(f_prev, f_cur) : reward_log(f_prev, f_cur);
}

double meanfield_progress(double rho_prev, double rho_cur, RewardForm form) {
  return apply_reward(form, 1.0 - rho_prev, 1.0 - rho_cur);
}

Environment::Environment(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

Observation Environment::reset(std::uint64_t seed) { return reset(cfg_.init, seed); }

StepResult Environment::step(double action) {
  if (done()) throw std::logic_error("step: episode already finished");
  if (!std::isfinite(action)) throw std::invalid_argument("step: action must be finite");
  const double q = std::clamp(action, cfg_.q_min, cfg_.q_max);
  const double before = progress();
  advance(q);
  ++step_index_;
  last_q_ = q;
  StepResult r;
  r.obs = observe();
  r.reward = apply_reward(cfg_.reward, before, progress());
  r.done = done();
  r.info = step_info();
  return r;
}

MeanFieldEnv::MeanFieldEnv(EnvConfig cfg) : Environment(cfg) {
  if (cfg_.system != SystemKind::kMeanField) {
    throw std::invalid_argument("MeanFieldEnv: config system must be meanfield");
  }
  mf_.c2 = cfg_.c2;
  mf_.q_min = cfg_.q_min;
  mf_.q_max = cfg_.q_max;
  mf_.dt = cfg_.dt;
  mf_.steps_per_episode = cfg_.steps;
  mf_.validate();
  reset(InitMode::kFixed, 0);
}

Observation MeanFieldEnv::reset(InitMode mode, std::uint64_t seed) {
  if (mode == InitMode::kFixed) return reset_to({0.9, 0.0});
  Rng rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_real_distribution<double> pop(0.05, 0.95);
  const double theta = phase(rng);
  const double rho = pop(rng);
  return reset_to({rho, theta});
}

Observation MeanFieldEnv::reset_to(PhaseState s) {
  if (!std::isfinite(s.rho0) || s.rho0 < 0.0 || s.rho0 > 1.0) {
    throw std::invalid_argument("reset: rho0 must lie in [0, 1]");
  }
  if (!std::isfinite(s.theta_s)) throw std::invalid_argument("reset: theta_s must be finite");
  state_ = {s.rho0, wrap_phase(s.theta_s)};
  start_episode();
  return observe();
}

std::unique_ptr<Environment> MeanFieldEnv::clone() const {
  return std::make_unique<MeanFieldEnv>(*this);
}

void MeanFieldEnv::advance(double q) {
  if (feedback_) {
    state_ = advance_feedback(state_, *feedback_, mf_);
    feedback_ = nullptr;
  } else {
    state_ = spinrl::advance(state_, q, mf_);
  }
}

StepResult MeanFieldEnv::step_feedback(const FeedbackLaw& law) {
  const double q0 = law(state_);
  feedback_ = &law;
  try {
    return step(q0);
  } catch (...) {
    feedback_ = nullptr;
    throw;
  }
}

QuantumEnv::QuantumEnv(EnvConfig cfg) : Environment(cfg) {
  if (cfg_.system != SystemKind::kQuantum) {
    throw std::invalid_argument("QuantumEnv: config system must be quantum");
  }
  target_ = twin_fock(cfg_.n_atoms);
  reset(InitMode::kFixed, 0);
}

Observation QuantumEnv::reset(InitMode mode, std::uint64_t seed) {
  if (mode == InitMode::kFixed) return reset_to(polar_state(cfg_.n_atoms));
  Rng rng(seed);
  return reset_to(haar_random_state(cfg_.n_atoms, rng));
}

Observation QuantumEnv::reset_to(FockVector psi) {
  if (psi.n_atoms != cfg_.n_atoms) {
    throw std::invalid_argument("reset: state has N=" + std::to_string(psi.n_atoms) +
                                ", environment has N=" + std::to_string(cfg_.n_atoms));
  }
  psi.validate();
  psi_ = std::move(psi);
  start_episode();
  refresh();
  return observe();
}

std::unique_ptr<Environment> QuantumEnv::clone() const {
  return std::make_unique<QuantumEnv>(*this);
}

void QuantumEnv::advance(double q) {
  if (cache_) {
    psi_.amps = cache_->get(q)->apply(psi_.amps, cfg_.dt);
  } else {
    psi_ = propagate(psi_, q, cfg_.dt, cfg_.c2);
  }
  refresh();
}

void QuantumEnv::refresh() {
  obs_ = observables(psi_);
  fidelity_ = fidelity(psi_, target_);
}

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  if (cfg.system == SystemKind::kMeanField) return std::make_unique<MeanFieldEnv>(cfg);
  return std::make_unique<QuantumEnv>(cfg);
}

}  // namespace spinrl
