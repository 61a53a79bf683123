#ifndef SPINRL_ENVIRONMENT_HPP_
#define SPINRL_ENVIRONMENT_HPP_

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "spinrl/meanfield.hpp"
#include "spinrl/quantum.hpp"

namespace spinrl {

enum class SystemKind { kMeanField, kQuantum };
enum class RewardForm { kDelta, kLog };
enum class InitMode { kFixed, kRandom };

std::string to_string(SystemKind s);
std::string to_string(RewardForm r);
std::string to_string(InitMode m);
SystemKind parse_system(const std::string& s);
RewardForm parse_reward(const std::string& s);
InitMode parse_init(const std::string& s);

struct EnvConfig {
  SystemKind system = SystemKind::kMeanField;
  int n_atoms = 2;  // quantum only
  double c2 = -1.0;
  double q_min = -6.0;
  double q_max = 6.0;
  double dt = 0.05;
  int steps = 100;
  RewardForm reward = RewardForm::kLog;
  InitMode init = InitMode::kFixed;

  // Throws std::invalid_argument naming the offending field. The quantum
  // system accepts c2 = 0 (frozen dynamics); mean-field requires c2 < 0.
  void validate() const;
};

// Defaults for the given system: mean-field (dt 0.05, 100 steps) or
// quantum (dt 0.1, 200 steps).
EnvConfig default_env_config(SystemKind system, int n_atoms = 2);

// (rho0, cos theta_s, sin theta_s).
struct Observation {
  std::array<double, 3> features{1.0, 1.0, 0.0};

  double rho0() const { return features[0]; }
  Eigen::VectorXd vector() const;
};

inline constexpr int kObservationSize = 3;

Observation make_observation(double rho0, double theta_s);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  // Fidelity (quantum) or rho0 (mean-field).
  double info = 0.0;
};

inline constexpr double kInfidelityFloor = 1e-10;

// Change of fidelity over one step.
double reward_delta(double f_prev, double f_cur);

// -ln((1 - F_cur) / (1 - F_prev)), infidelities floored at 1e-10.
double reward_log(double f_prev, double f_cur);

double apply_reward(RewardForm form, double f_prev, double f_cur);

// Mean-field analog of fidelity is 1 - rho0.
double meanfield_progress(double rho_prev, double rho_cur, RewardForm form);

// Episodic control problem over one dynamical system. One instance is
// single-threaded; clone() yields an independent copy of the full state.
class Environment {
 public:
  explicit Environment(EnvConfig cfg);
  virtual ~Environment() = default;

  const EnvConfig& config() const { return cfg_; }

  // Resets with the configured init mode; random draws come from seed.
  Observation reset(std::uint64_t seed);
  virtual Observation reset(InitMode mode, std::uint64_t seed) = 0;

  // Clips action to [q_min, q_max], holds it for dt and advances.
  // Throws std::logic_error when the episode is finished.
  StepResult step(double action);

  virtual std::unique_ptr<Environment> clone() const = 0;

  // Fidelity with the target (quantum) or 1 - rho0 (mean-field).
  virtual double progress() const = 0;
  virtual double rho0() const = 0;
  virtual double theta_s() const = 0;

  Observation observe() const { return make_observation(rho0(), theta_s()); }
  double time() const { return step_index_ * cfg_.dt; }
  int step_index() const { return step_index_; }
  bool done() const { return step_index_ >= cfg_.steps; }
  double last_q() const { return last_q_; }

 protected:
  virtual void advance(double q) = 0;
  virtual double step_info() const = 0;
  void start_episode() {
    step_index_ = 0;
    last_q_ = 0.0;
  }

  EnvConfig cfg_;

 private:
  int step_index_ = 0;
  double last_q_ = 0.0;
};

class MeanFieldEnv final : public Environment {
 public:
  explicit MeanFieldEnv(EnvConfig cfg);

  using Environment::reset;
  // Fixed: (theta_s, rho0) = (0, 0.9). Random: theta_s ~ U[0, 2pi),
  // rho0 ~ U(0.05, 0.95).
  Observation reset(InitMode mode, std::uint64_t seed) override;
  // Throws std::invalid_argument when rho0 is outside [0, 1] or non-finite.
  Observation reset_to(PhaseState s);

  std::unique_ptr<Environment> clone() const override;
  double progress() const override { return 1.0 - state_.rho0; }
  double rho0() const override { return state_.rho0; }
  double theta_s() const override { return state_.theta_s; }

  const PhaseState& state() const { return state_; }
  const MeanFieldConfig& dynamics() const { return mf_; }

  // One step under a closed-loop law evaluated inside the integrator. The
  // recorded action is the law at the start of the interval.
  StepResult step_feedback(const FeedbackLaw& law);

 protected:
  void advance(double q) override;
  double step_info() const override { return state_.rho0; }

 private:
  MeanFieldConfig mf_;
  PhaseState state_;
  double prev_rho0_ = 1.0;
  const FeedbackLaw* feedback_ = nullptr;
};

class QuantumEnv final : public Environment {
 public:
  explicit QuantumEnv(EnvConfig cfg);

  using Environment::reset;
  // Fixed: |0, N, 0>. Random: Haar-random state in the F_z = 0 subspace.
  Observation reset(InitMode mode, std::uint64_t seed) override;
  // Throws std::invalid_argument for wrong dimension or norm.
  Observation reset_to(FockVector psi);

  std::unique_ptr<Environment> clone() const override;
  double progress() const override { return fidelity_; }
  double rho0() const override { return obs_.rho0; }
  double theta_s() const override { return obs_.theta_s; }

  const FockVector& state() const { return psi_; }
  const FockVector& target() const { return target_; }

  // Shares eigendecompositions keyed by q across clones; worthwhile only
  // when controls repeat exactly (grid searches).
  void use_propagator_cache(std::shared_ptr<PropagatorCache> cache) { cache_ = std::move(cache); }

 protected:
  void advance(double q) override;
  double step_info() const override { return fidelity_; }

 private:
  void refresh();

  FockVector psi_;
  FockVector target_;
  QuantumObservables obs_;
  double fidelity_ = 0.0;
  std::shared_ptr<PropagatorCache> cache_;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);

}  // namespace spinrl

#endif  // SPINRL_ENVIRONMENT_HPP_
