#include "spinrl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spinrl/rng.hpp"

namespace spinrl {

namespace {

// Runs body(i) for i in [0, n) over up to `workers` threads.
template <typename Body>
void parallel_for(int n, int workers, Body body) {
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += w) body(i);
    });
  }
}

RunRow snapshot(const Environment& env) {
  return {env.time(), env.last_q(), env.rho0(), env.theta_s(), env.progress()};
}

}  // namespace

double RunRecord::max_fidelity() const {
  double best = 0.0;
  for (const auto& r : rows) best = std::max(best, r.fidelity);
  return best;
}

std::optional<double> RunRecord::first_time_reaching(double threshold) const {
  for (const auto& r : rows) {
    if (r.fidelity >= threshold) return r.t;
  }
  return std::nullopt;
}

void RunRecord::validate(int expected_steps) const {
  if (static_cast<int>(rows.size()) != expected_steps + 1) {
    throw std::logic_error("RunRecord: expected steps+1 rows");
  }
  if (rows.front().t != 0.0) throw std::logic_error("RunRecord: first row must be t=0");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].t > rows[i - 1].t) ||
        std::abs(rows[i].t - rows[i - 1].t - dt) > 1e-9 * std::max(1.0, dt)) {
      throw std::logic_error("RunRecord: t must increase by dt");
    }
  }
}

RunRecord run_steps(Environment& env, const std::function<void(Environment&)>& step_once) {
  RunRecord rec;
  rec.dt = env.config().dt;
  rec.rows.reserve(static_cast<std::size_t>(env.config().steps) + 1);
  rec.rows.push_back(snapshot(env));
  while (!env.done()) {
    step_once(env);
    rec.rows.back().q = env.last_q();
    rec.rows.push_back(snapshot(env));
  }
  return rec;
}

RunRecord run_controller(Environment& env, const Controller& controller) {
  return run_steps(env, [&controller](Environment& e) { e.step(controller(e)); });
}

Controller policy_controller(const PolicyParams& policy, bool deterministic,
                             std::uint64_t seed) {
  if (deterministic) {
    return [&policy](const Environment& env) {
      return action_mean(policy, env.observe().vector());
    };
  }
  auto rng = std::make_shared<Rng>(seed);
  return [&policy, rng](const Environment& env) {
    return policy_sample(policy, env.observe().vector(), *rng).action;
  };
}

RunRecord rollout(Environment& env, const PolicyParams& policy, bool deterministic,
                  std::uint64_t seed) {
  return run_controller(env, policy_controller(policy, deterministic, seed));
}

PolicyMap policy_map(const PolicyParams& policy, int n_theta, int n_rho) {
  if (n_theta < 2 || n_rho < 2) throw std::invalid_argument("policy_map: grid sizes must be >= 2");
  PolicyMap map;
  for (int j = 0; j < n_theta; ++j) map.theta_nodes.push_back(kTwoPi * j / n_theta);
  for (int i = 0; i < n_rho; ++i) map.rho_nodes.push_back(static_cast<double>(i) / (n_rho - 1));
  Eigen::MatrixXd obs(kObservationSize, static_cast<Eigen::Index>(n_theta) * n_rho);
  for (int i = 0; i < n_rho; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const Observation o = make_observation(map.rho_nodes[i], map.theta_nodes[j]);
      obs.col(static_cast<Eigen::Index>(i) * n_theta + j) = o.vector();
    }
  }
  const Eigen::VectorXd means = action_mean_batch(policy, obs);
  map.mean_action.resize(n_rho, n_theta);
  for (int i = 0; i < n_rho; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      map.mean_action(i, j) = means(static_cast<Eigen::Index>(i) * n_theta + j);
    }
  }
  return map;
}

NoiseReport noise_eval(const Environment& env, const PolicyParams& policy, double sigma,
                       int n_samples, std::uint64_t seed, int workers) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise_eval: sigma must be >= 0");
  if (n_samples < 1) throw std::invalid_argument("noise_eval: n_samples must be >= 1");
  NoiseReport rep;
  rep.sigma = sigma;
  rep.n_samples = n_samples;
  rep.trajectories.resize(static_cast<std::size_t>(n_samples));
  std::vector<RunRecord> records(static_cast<std::size_t>(n_samples));

  parallel_for(n_samples, workers, [&](int s) {
    std::unique_ptr<Environment> local = env.clone();
    Rng rng(split_seed(seed, "noise", static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double lo = policy.q_min;
    const double hi = policy.q_max;
    records[static_cast<std::size_t>(s)] = run_controller(*local, [&](const Environment& e) {
      const double mu = action_mean(policy, e.observe().vector());
      return std::clamp(mu + sigma * normal(rng), lo, hi);
    });
  });

  const std::size_t n_rows = records.front().rows.size();
  for (std::size_t i = 0; i < n_rows; ++i) rep.times.push_back(records.front().rows[i].t);
  for (int s = 0; s < n_samples; ++s) {
    auto& traj = rep.trajectories[static_cast<std::size_t>(s)];
    for (const auto& row : records[static_cast<std::size_t>(s)].rows) traj.push_back(row.fidelity);
  }
  rep.mean_fidelity.assign(n_rows, 0.0);
  rep.std_fidelity.assign(n_rows, 0.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    double mean = 0.0;
    for (const auto& traj : rep.trajectories) mean += traj[i];
    mean /= n_samples;
    double ss = 0.0;
    for (const auto& traj : rep.trajectories) ss += (traj[i] - mean) * (traj[i] - mean);
    rep.mean_fidelity[i] = mean;
    rep.std_fidelity[i] = n_samples > 1 ? std::sqrt(ss / (n_samples - 1)) : 0.0;
  }
  return rep;
}

std::vector<GeneralizationRow> generalize(const PolicyParams& policy, const EnvConfig& base,
                                          const std::vector<int>& n_list, int workers) {
  if (base.system != SystemKind::kQuantum) {
    throw std::invalid_argument("generalize: requires the quantum system");
  }
  for (int n : n_list) require_even_atoms(n);
  std::vector<GeneralizationRow> rows(n_list.size());
  parallel_for(static_cast<int>(n_list.size()), workers, [&](int i) {
    EnvConfig cfg = base;
    cfg.n_atoms = n_list[static_cast<std::size_t>(i)];
    QuantumEnv env(cfg);
    env.reset(InitMode::kFixed, 0);
    const RunRecord rec = rollout(env, policy, true);
    rows[static_cast<std::size_t>(i)] = {cfg.n_atoms, rec.final_fidelity(), rec.max_fidelity()};
  });
  return rows;
}

}  // namespace spinrl
