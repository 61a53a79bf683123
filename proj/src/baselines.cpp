#include "spinrl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace spinrl {

namespace {

constexpr double kBangTolerance = 1e-9;

// Signed shortest rotation from theta to target, in (-pi, pi].
double signed_gap(double theta, double target) {
  double d = std::fmod(target - theta, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

bool better_greedy(double gain, double q, double best_gain, double best_q) {
  if (gain != best_gain) return gain > best_gain;
  if (std::abs(q) != std::abs(best_q)) return std::abs(q) < std::abs(best_q);
  return q < best_q;
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  if (n == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  v.back() = hi;
  return v;
}

Controller greedy_controller(std::vector<double> q_grid) {
  if (q_grid.empty()) throw std::invalid_argument("greedy: q_grid must be non-empty");
  auto cache = std::make_shared<std::shared_ptr<PropagatorCache>>();
  return [grid = std::move(q_grid), cache](const Environment& env) {
    const EnvConfig& cfg = env.config();
    if (cfg.system == SystemKind::kQuantum && !*cache) {
      *cache = std::make_shared<PropagatorCache>(cfg.n_atoms, cfg.c2);
    }
    const double base = env.progress();
    double best_q = grid.front();
    double best_gain = -std::numeric_limits<double>::infinity();
    for (double q : grid) {
      if (q < cfg.q_min || q > cfg.q_max) {
        throw std::invalid_argument("greedy: grid value outside [q_min, q_max]");
      }
      std::unique_ptr<Environment> trial = env.clone();
      if (auto* quantum = dynamic_cast<QuantumEnv*>(trial.get()); quantum && *cache) {
        quantum->use_propagator_cache(*cache);
      }
      trial->step(q);
      const double gain = trial->progress() - base;
      if (better_greedy(gain, q, best_gain, best_q)) {
        best_gain = gain;
        best_q = q;
      }
    }
    return best_q;
  };
}

RunRecord greedy_rollout(Environment& env, const std::vector<double>& q_grid) {
  return run_controller(env, greedy_controller(q_grid));
}

double ramp_value(const RampProtocol& ramp, double tau) {
  const double frac = ramp.ramp_time > 0.0 ? std::min(tau / ramp.ramp_time, 1.0) : 1.0;
  return ramp.q_initial + (ramp.q_final - ramp.q_initial) * frac;
}

Controller ramp_controller(const RampProtocol& ramp) {
  return [ramp](const Environment& env) {
    return ramp_value(ramp, env.time() + 0.5 * env.config().dt);
  };
}

RampSearchResult ramp_search(const Environment& env, const std::vector<double>& qi_grid,
                             const std::vector<double>& qf_grid,
                             const std::vector<double>& ramp_time_grid, int workers) {
  if (qi_grid.empty() || qf_grid.empty() || ramp_time_grid.empty()) {
    throw std::invalid_argument("ramp_search: grids must be non-empty");
  }
  const EnvConfig& cfg = env.config();
  const double horizon = cfg.steps * cfg.dt;
  for (double q : qi_grid) {
    if (q < cfg.q_min || q > cfg.q_max) throw std::invalid_argument("ramp_search: q_i out of bounds");
  }
  for (double q : qf_grid) {
    if (q < cfg.q_min || q > cfg.q_max) throw std::invalid_argument("ramp_search: q_f out of bounds");
  }
  for (double t : ramp_time_grid) {
    if (!(t > 0.0) || t > horizon + 1e-12) {
      throw std::invalid_argument("ramp_search: ramp time must lie in (0, horizon]");
    }
  }

  std::vector<RampProtocol> candidates;
  for (double qi : qi_grid) {
    for (double qf : qf_grid) {
      for (double t : ramp_time_grid) candidates.push_back({qi, qf, t});
    }
  }
  std::vector<double> scores(candidates.size());
  const int n = static_cast<int>(candidates.size());
  const int w = std::max(1, std::min(workers, n));
  auto body = [&](int t) {
    for (int i = t; i < n; i += w) {
      std::unique_ptr<Environment> local = env.clone();
      const RampProtocol& r = candidates[static_cast<std::size_t>(i)];
      while (!local->done()) {
        local->step(ramp_value(r, local->time() + 0.5 * cfg.dt));
      }
      scores[static_cast<std::size_t>(i)] = local->progress();
    }
  };
  if (w == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < w; ++t) pool.emplace_back(body, t);
  }

  std::size_t best = 0;
  auto key = [&](std::size_t i) {
    const auto& c = candidates[i];
    return std::make_tuple(c.q_initial, c.q_final, c.ramp_time);
  };
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (scores[i] > scores[best] || (scores[i] == scores[best] && key(i) < key(best))) best = i;
  }

  RampSearchResult res;
  res.best = candidates[best];
  res.final_fidelity = scores[best];
  res.evaluated = n;
  std::unique_ptr<Environment> replay = env.clone();
  res.record = run_controller(*replay, ramp_controller(res.best));
  return res;
}

RampSearchResult ramp_search(const Environment& env, int workers) {
  const EnvConfig& cfg = env.config();
  const double horizon = cfg.steps * cfg.dt;
  std::vector<double> times;
  for (int i = 1; i <= 10; ++i) times.push_back(horizon * i / 10.0);
  const std::vector<double> q = linspace(cfg.q_min, cfg.q_max, 25);
  return ramp_search(env, q, q, times, workers);
}

Controller analytic_meanfield_controller() {
  return [](const Environment& env) {
    const auto* mf = dynamic_cast<const MeanFieldEnv*>(&env);
    if (!mf) throw std::invalid_argument("analytic protocol applies only to the mean-field system");
    const MeanFieldConfig& dyn = mf->dynamics();
    const PhaseState s = mf->state();
    const double gap = signed_gap(s.theta_s, kHalfPi);
    if (std::abs(gap) < kBangTolerance || s.rho0 <= 0.0 || s.rho0 >= 1.0) {
      return analytic_optimal_q(s, dyn);
    }

    // Rotation rate of theta_s is -2q + drift; pick the bound that closes
    // the gap sooner.
    const double drift = mf_derivatives(s, 0.0, dyn.c2).dtheta_s;
    const double up_rate = -2.0 * dyn.q_min + drift;    // positive rotation
    const double down_rate = -2.0 * dyn.q_max + drift;  // negative rotation
    const double up_dist = gap > 0.0 ? gap : gap + kTwoPi;
    const double down_dist = kTwoPi - up_dist;
    const double up_time = up_rate > 0.0 ? up_dist / up_rate : std::numeric_limits<double>::infinity();
    const double down_time =
        down_rate < 0.0 ? down_dist / -down_rate : std::numeric_limits<double>::infinity();
    const bool go_up = up_time <= down_time;
    const double bang = go_up ? dyn.q_min : dyn.q_max;
    const double dir = go_up ? 1.0 : -1.0;

    auto remaining = [&](double q) {
      // Rotation still needed after one step, measured along dir.
      const PhaseState next = advance(s, q, dyn);
      const double moved = dir * signed_gap(s.theta_s, next.theta_s);
      return (go_up ? up_dist : down_dist) - moved;
    };
    if (remaining(bang) > 0.0) return bang;

    // Final bang step: bisect for the control that lands on pi/2.
    const double hold = std::clamp(0.5 * drift, dyn.q_min, dyn.q_max);
    double lo = bang;
    double hi = hold;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (remaining(mid) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  };
}

RunRecord analytic_meanfield_rollout(Environment& env) {
  if (env.config().system != SystemKind::kMeanField) {
    throw std::invalid_argument("analytic protocol applies only to the mean-field system");
  }
  auto& mf = dynamic_cast<MeanFieldEnv&>(env);
  const Controller bang = analytic_meanfield_controller();
  const MeanFieldConfig& dyn = mf.dynamics();
  const FeedbackLaw law = [&dyn](const PhaseState& s) { return analytic_optimal_q(s, dyn); };
  return run_steps(env, [&](Environment&) {
    const PhaseState& s = mf.state();
    if (std::abs(signed_gap(s.theta_s, kHalfPi)) < kBangTolerance) {
      mf.step_feedback(law);
    } else {
      mf.step(bang(mf));
    }
  });
}

RunRecord constant_q_rollout(Environment& env, double q) {
  const EnvConfig& cfg = env.config();
  if (q < cfg.q_min || q > cfg.q_max) throw std::invalid_argument("constant_q: q out of bounds");
  return run_controller(env, [q](const Environment&) { return q; });
}

}  // namespace spinrl
