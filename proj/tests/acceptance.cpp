// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [--seeds K] [--only 1,2,...] [--out DIR]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spinrl/baselines.hpp"
#include "spinrl/evaluation.hpp"
#include "spinrl/io.hpp"
#include "spinrl/meanfield.hpp"
#include "spinrl/ppo.hpp"
#include "spinrl/quantum.hpp"

using namespace spinrl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

double angle_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

fs::path g_out = "acceptance_artifacts";
int g_seeds = 5;

TrainResult train_policy(SystemKind system, int n, InitMode init, std::uint64_t seed) {
  EnvConfig env_cfg = default_env_config(system, n);
  env_cfg.init = init;
  TrainConfig cfg = default_train_config(system, n);
  cfg.seed = seed;
  return train([env_cfg] { return make_environment(env_cfg); }, cfg, init);
}

RunRecord deterministic_rollout(const PolicyParams& p, SystemKind system, int n) {
  auto env = make_environment(default_env_config(system, n));
  env->reset(InitMode::kFixed, 0);
  return rollout(*env, p, true);
}

void save(const std::string& name, SystemKind system, int n, InitMode init, std::uint64_t seed,
          const PolicyParams& p) {
  fs::create_directories(g_out);
  Checkpoint ck;
  ck.config = {default_env_config(system, n), default_train_config(system, n)};
  ck.config.env.init = init;
  ck.config.train.seed = seed;
  ck.init = init;
  ck.params = p;
  save_checkpoint(g_out / (name + ".json"), ck);
}

// 1. Pinned mean-field trajectory against the logistic closed form.
Verdict criterion1() {
  const auto t0 = Clock::now();
  MeanFieldConfig cfg;
  PhaseState s{0.9, kHalfPi};
  double drift = 0.0;
  double curve_err = 0.0;
  for (int i = 1; i <= cfg.steps_per_episode; ++i) {
    s = advance_pinned(s, cfg);
    drift = std::max(drift, angle_gap(s.theta_s, kHalfPi));
    curve_err = std::max(curve_err, std::abs(s.rho0 - logistic_oracle(0.9, i * cfg.dt, cfg.c2)));
  }
  const double closed = logistic_oracle(0.9, 5.0, cfg.c2);
  const double err = std::abs(s.rho0 - closed);
  const double err_quoted = std::abs(s.rho0 - 4.086e-4);

  // The literal q = c2 (1 - rho0) for comparison.
  PhaseState lit{0.9, kHalfPi};
  double lit_drift = 0.0;
  for (int i = 0; i < cfg.steps_per_episode; ++i) {
    lit = advance_feedback(lit, [&](const PhaseState& x) { return cfg.c2 * (1.0 - x.rho0); }, cfg);
    lit_drift = std::max(lit_drift, angle_gap(lit.theta_s, kHalfPi));
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = err < 1e-6 && err_quoted < 1e-6 && drift < 1e-6 && secs < 1.0;
  v.detail = "rho0(5)=" + fmt(s.rho0, 7) + " closed=" + fmt(closed, 7) + " |err|=" + fmt(err, 2) +
             " |err vs 4.086e-4|=" + fmt(err_quoted, 2) + " theta drift=" + fmt(drift, 2) +
             " curve err=" + fmt(curve_err, 2) + " [q=c2(1-2rho0)]; literal c2(1-rho0): rho0(5)=" +
             fmt(lit.rho0, 4) + " theta drift=" + fmt(lit_drift, 3) + "; " + fmt(secs, 3) + "s";
  return v;
}

// 2. N = 2 exact physics.
Verdict criterion2() {
  const auto t0 = Clock::now();
  const double c2 = -1.0;
  const double tq = qsl_bound(c2);
  const FockVector target = twin_fock(2);

  const FockVector at_qsl = propagate(polar_state(2), c2 / 4.0, tq, c2);
  const double f_qsl = fidelity(at_qsl, target);

  FockVector psi = polar_state(2);
  double curve_err = 0.0;
  for (int i = 1; i <= 200; ++i) {
    psi = propagate(psi, c2 / 4.0, 0.1, c2);
    const double s = std::sin(0.1 * i / std::numbers::sqrt2);
    curve_err = std::max(curve_err, std::abs(fidelity(psi, target) - s * s));
  }

  Rng rng(2024);
  std::uniform_real_distribution<double> uq(-1.5, 1.0);
  BlochPoint b{0.8, 1.3};
  FockVector phi = bloch_to_fock(b);
  double oracle_err = 0.0;
  for (int seg = 0; seg < 40; ++seg) {
    const double q = uq(rng);
    for (int j = 0; j < 200; ++j) b = bloch_oracle_step(b, q, 0.0005, c2);
    phi = propagate(phi, q, 0.1, c2);
    const QuantumObservables o = observables(phi);
    const double c = std::cos(b.theta / 2.0);
    oracle_err = std::max({oracle_err, std::abs(o.rho0 - c * c), angle_gap(o.theta_s, -b.phi)});
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = f_qsl >= 0.9999 && curve_err < 1e-8 && oracle_err < 1e-5 && secs < 1.0;
  v.detail = "F(T_QSL=" + fmt(tq, 6) + ")=" + fmt(f_qsl, 12) + " max|F-sin^2|=" + fmt(curve_err, 2) +
             " Bloch oracle max err=" + fmt(oracle_err, 2) + "; " + fmt(secs, 3) + "s";
  return v;
}

// 3. Mean-field PPO.
Verdict criterion3() {
  const auto t0 = Clock::now();
  Verdict v;
  std::string log;
  for (int seed = 1; seed <= g_seeds; ++seed) {
    const TrainResult r = train_policy(SystemKind::kMeanField, 2, InitMode::kFixed, seed);
    const RunRecord rec = deterministic_rollout(r.params, SystemKind::kMeanField, 2);
    const double c2 = -1.0;
    const double t_end = rec.rows.back().t;
    double ss_lit = 0.0, ss_fix = 0.0;
    int n = 0;
    for (std::size_t i = 0; i + 1 < rec.rows.size(); ++i) {
      const auto& row = rec.rows[i];
      if (row.t < t_end / 3.0 - 1e-12) continue;
      ss_lit += std::pow(row.q - c2 * (1.0 - row.rho0), 2);
      ss_fix += std::pow(row.q - c2 * (1.0 - 2.0 * row.rho0), 2);
      ++n;
    }
    const double rms_lit = std::sqrt(ss_lit / n);
    const double rms_fix = std::sqrt(ss_fix / n);
    const double rho_end = rec.rows.back().rho0;
    const bool ok = rho_end < 0.01 && rms_lit < 0.15 * std::abs(c2);
    log += " seed" + std::to_string(seed) + ":rho0(5)=" + fmt(rho_end, 3) + ",rms=" + fmt(rms_lit, 3) +
           "(vs c2(1-2rho0): " + fmt(rms_fix, 3) + ")";
    if (ok) {
      save("meanfield_fixed", SystemKind::kMeanField, 2, InitMode::kFixed, seed, r.params);
      v.pass = true;
      break;
    }
  }
  v.detail = log.substr(1) + "; " + fmt(seconds_since(t0), 3) + "s";
  return v;
}

// 4. N = 2 PPO against the speed limit.
Verdict criterion4() {
  const auto t0 = Clock::now();
  const double limit = 1.25 * qsl_bound(-1.0);
  Verdict v;
  std::string log;
  for (int seed = 1; seed <= g_seeds; ++seed) {
    const TrainResult r = train_policy(SystemKind::kQuantum, 2, InitMode::kFixed, seed);
    const RunRecord rec = deterministic_rollout(r.params, SystemKind::kQuantum, 2);
    const auto t99 = rec.first_time_reaching(0.99);
    const bool ok = rec.final_fidelity() >= 0.99 && t99 && *t99 <= limit;
    log += " seed" + std::to_string(seed) + ":F=" + fmt(rec.final_fidelity(), 5) +
           ",t99=" + (t99 ? fmt(*t99, 3) : std::string("none"));
    if (ok) {
      save("n2_fixed", SystemKind::kQuantum, 2, InitMode::kFixed, seed, r.params);
      v.pass = true;
      break;
    }
  }
  v.detail = "limit 1.25*T_QSL=" + fmt(limit, 4) + ";" + log + "; " + fmt(seconds_since(t0), 3) + "s";
  return v;
}

struct N10Result {
  bool have = false;
  PolicyParams pi_s;
  PolicyParams pi_g;
};

N10Result g_n10;

// 5. N = 10 PPO against greedy and the best linear ramp.
Verdict criterion5() {
  const auto t0 = Clock::now();
  auto env = make_environment(default_env_config(SystemKind::kQuantum, 10));
  env->reset(InitMode::kFixed, 0);
  auto greedy_env = env->clone();
  const RunRecord greedy = greedy_rollout(*greedy_env, linspace(-6.0, 6.0, 49));
  const RampSearchResult ramp = ramp_search(*env);
  const double bar = std::max(greedy.final_fidelity(), ramp.final_fidelity);
  std::string log = "greedy=" + fmt(greedy.final_fidelity(), 5) + " ramp=" +
                    fmt(ramp.final_fidelity, 5) + " (q_i=" + fmt(ramp.best.q_initial) + ",q_f=" +
                    fmt(ramp.best.q_final) + ",t=" + fmt(ramp.best.ramp_time) + ");";
  Verdict v;
  for (int seed = 1; seed <= g_seeds; ++seed) {
    const TrainResult s = train_policy(SystemKind::kQuantum, 10, InitMode::kFixed, seed);
    const TrainResult g = train_policy(SystemKind::kQuantum, 10, InitMode::kRandom, seed);
    const RunRecord rs = deterministic_rollout(s.params, SystemKind::kQuantum, 10);
    const RunRecord rg = deterministic_rollout(g.params, SystemKind::kQuantum, 10);
    const bool g_better = rg.final_fidelity() >= rs.final_fidelity();
    const RunRecord& best = g_better ? rg : rs;
    const auto t99 = best.first_time_reaching(0.99);
    const bool ok = t99 && *t99 <= 20.0 && best.final_fidelity() > bar;
    log += " seed" + std::to_string(seed) + ":pi_s=" + fmt(rs.final_fidelity(), 5) +
           ",pi_g=" + fmt(rg.final_fidelity(), 5) + ",t99=" + (t99 ? fmt(*t99, 3) : std::string("none"));
    if (!g_n10.have || ok) {
      g_n10 = {true, s.params, g.params};
      save("n10_fixed", SystemKind::kQuantum, 10, InitMode::kFixed, seed, s.params);
      save("n10_random", SystemKind::kQuantum, 10, InitMode::kRandom, seed, g.params);
    }
    if (ok) {
      v.pass = true;
      break;
    }
  }
  v.detail = log + "; " + fmt(seconds_since(t0), 4) + "s";
  return v;
}

// 6. Noise robustness report. Statistics are checked against a brute-force
// recomputation; the stability comparison is informational.
Verdict criterion6() {
  const auto t0 = Clock::now();
  if (!g_n10.have) {
    g_n10 = {true, train_policy(SystemKind::kQuantum, 10, InitMode::kFixed, 1).params,
             train_policy(SystemKind::kQuantum, 10, InitMode::kRandom, 1).params};
  }
  auto env = make_environment(default_env_config(SystemKind::kQuantum, 10));
  env->reset(InitMode::kFixed, 0);
  const double sigma = 0.1;
  bool stats_ok = true;
  std::string log;
  for (const auto& [name, p] : {std::pair{"pi_s", &g_n10.pi_s}, std::pair{"pi_g", &g_n10.pi_g}}) {
    const NoiseReport rep = noise_eval(*env, *p, sigma, 100, split_seed(0, "noise"));
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      double sum = 0.0;
      for (const auto& t : rep.trajectories) sum += t[i];
      const double mean = sum / 100.0;
      double ss = 0.0;
      for (const auto& t : rep.trajectories) ss += (t[i] - mean) * (t[i] - mean);
      const double sd = std::sqrt(ss / 99.0);
      stats_ok = stats_ok && std::abs(rep.mean_fidelity[i] - mean) < 1e-12 &&
                 std::abs(rep.std_fidelity[i] - sd) < 1e-12 && rep.std_fidelity[i] >= 0.0 &&
                 rep.mean_fidelity[i] >= 0.0 && rep.mean_fidelity[i] <= 1.0;
    }
    stats_ok = stats_ok && rep.trajectories.size() == 100 && rep.times.size() == 201;
    auto det_env = env->clone();
    const double det = rollout(*det_env, *p, true).final_fidelity();
    log += std::string(" ") + name + ": det=" + fmt(det, 5) + " noisy mean=" +
           fmt(rep.final_mean(), 5) + " std=" + fmt(rep.final_std(), 4) +
           " degradation=" + fmt(det - rep.final_mean(), 4) + ";";
    fs::create_directories(g_out);
    std::ostringstream os;
    write_noise_report_csv(os, rep);
    write_text_file(g_out / (std::string("noise_") + name + ".csv"), os.str());
  }
  Verdict v;
  v.pass = stats_ok;
  v.detail = std::string("statistics ") + (stats_ok ? "verified" : "MISMATCH") + ";" + log +
             " (report only); " + fmt(seconds_since(t0), 3) + "s";
  return v;
}

// 7. Property suites without training.
Verdict criterion7() {
  const auto t0 = Clock::now();
  std::vector<std::string> failures;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  double unitarity = 0.0;
  for (int n : {2, 4, 10, 20, 40}) {
    for (double q : {-6.0, -0.25, 0.0, 3.0}) {
      const Eigen::MatrixXcd u = Propagator(build_hamiltonian(n, q, -1.0)).unitary(0.1);
      unitarity = std::max(
          unitarity,
          (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff());
    }
  }
  require(unitarity < 1e-10, "unitarity " + fmt(unitarity, 3));

  Rng rng(7);
  std::uniform_real_distribution<double> uq(-6.0, 6.0);
  double drift = 0.0;
  for (int n : {2, 10, 30}) {
    FockVector psi = polar_state(n);
    for (int i = 0; i < 200; ++i) psi = propagate(psi, uq(rng), 0.1, -1.0);
    drift = std::max(drift, std::abs(psi.norm() - 1.0));
  }
  require(drift < 1e-9, "norm drift " + fmt(drift, 3));

  bool structure = true;
  for (int n = 2; n <= 40; n += 2) {
    const HamiltonianMatrix h = build_hamiltonian(n, uq(rng), -1.0);
    structure = structure && h.entries == h.entries.transpose();
    for (int i = 0; i < h.entries.rows(); ++i) {
      for (int j = 0; j < h.entries.cols(); ++j) {
        if (std::abs(i - j) > 1) structure = structure && h.entries(i, j) == 0.0;
      }
    }
  }
  require(structure, "hamiltonian symmetry/tridiagonality");

  std::uniform_real_distribution<double> uf(0.0, 0.999);
  double tele = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(201);
    for (double& x : f) x = uf(rng);
    double sd = 0.0, sl = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
      sd += reward_delta(f[i - 1], f[i]);
      sl += reward_log(f[i - 1], f[i]);
    }
    tele = std::max({tele, std::abs(sd - (f.back() - f.front())),
                     std::abs(sl - reward_log(f.front(), f.back()))});
  }
  require(tele < 1e-12, "telescoping " + fmt(tele, 3));

  auto fd = [](const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double keep = x(i);
      x(i) = keep + 1e-6;
      const double up = f(x);
      x(i) = keep - 1e-6;
      const double down = f(x);
      x(i) = keep;
      g(i) = (up - down) / 2e-6;
    }
    return g;
  };
  auto rel = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(1e-12, a.norm() + b.norm());
  };
  Rng prng(3);
  PolicyParams p = make_policy(3, {6, 5}, -6.0, 6.0, prng);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (Eigen::Index i = 0; i < p.actor.num_params(); ++i) p.actor.params()(i) = nd(prng);
  for (Eigen::Index i = 0; i < p.critic.num_params(); ++i) p.critic.params()(i) = nd(prng);
  p.log_std = -0.4;
  UpdateBatch batch;
  const int nb = 16;
  batch.obs.resize(3, nb);
  batch.raw_actions.resize(nb);
  batch.logprob_old.resize(nb);
  batch.advantages.resize(nb);
  batch.returns.resize(nb);
  for (int j = 0; j < nb; ++j) {
    const double th = 6.0 * std::abs(nd(prng));
    batch.obs.col(j) << std::clamp(0.5 + 0.5 * nd(prng), 0.0, 1.0), std::cos(th), std::sin(th);
    const double mu = action_mean(p, batch.obs.col(j));
    batch.raw_actions(j) = mu + std::exp(p.log_std) * 2.0 * nd(prng);
    batch.logprob_old(j) = gaussian_logprob(batch.raw_actions(j), mu, p.log_std) + 0.3 * nd(prng);
    batch.advantages(j) = 2.0 * nd(prng);
    batch.returns(j) = 4.0 * nd(prng);
  }
  const double g_actor = rel(actor_loss(p, batch, 0.2).gradient, fd([&](const Eigen::VectorXd& v) {
    PolicyParams c = p;
    c.set_actor_vector(v);
    return actor_loss(c, batch, 0.2).loss;
  }, p.actor_vector()));
  const double g_critic = rel(critic_loss(p, batch).gradient, fd([&](const Eigen::VectorXd& v) {
    PolicyParams c = p;
    c.critic.params() = v;
    return critic_loss(c, batch).loss;
  }, p.critic.params()));
  const Eigen::VectorXd x0 = batch.obs.col(0);
  const double g_logp = rel(logprob_gradient(p, x0, 1.3), fd([&](const Eigen::VectorXd& v) {
    PolicyParams c = p;
    c.set_actor_vector(v);
    return gaussian_logprob(1.3, action_mean(c, x0), c.log_std);
  }, p.actor_vector()));
  Mlp::Tape tape;
  const Eigen::MatrixXd y = p.critic.forward_batch(batch.obs, &tape);
  const double g_mlp = rel(p.critic.backward(tape, y), fd([&](const Eigen::VectorXd& v) {
    Mlp c = p.critic;
    c.params() = v;
    return 0.5 * c.forward_batch(batch.obs).squaredNorm();
  }, p.critic.params()));
  const double worst_grad = std::max({g_actor, g_critic, g_logp, g_mlp});
  require(worst_grad < 1e-5, "gradient check " + fmt(worst_grad, 3));

  const PhaseState s0{0.7, 0.4};
  auto integrate = [&](int n) {
    PhaseState s = s0;
    for (int i = 0; i < n; ++i) s = rk4_step(s, -0.35, 2.0 / n, -1.0);
    return s;
  };
  const PhaseState ref = integrate(20000);
  auto err = [&](int n) {
    const PhaseState s = integrate(n);
    return std::hypot(s.rho0 - ref.rho0, angle_gap(s.theta_s, ref.theta_s));
  };
  const double order = std::log2(err(20) / err(40));
  require(order > 3.7 && order < 4.4, "rk4 order " + fmt(order, 3));

  auto tiny = [] {
    EnvConfig env_cfg = default_env_config(SystemKind::kQuantum, 4);
    TrainConfig cfg = default_train_config(SystemKind::kQuantum, 4);
    cfg.total_epochs = 5;
    cfg.seed = 99;
    return train([env_cfg] { return make_environment(env_cfg); }, cfg, InitMode::kRandom);
  };
  const TrainResult a = tiny();
  const TrainResult b = tiny();
  bool repro = a.params.actor_vector() == b.params.actor_vector() &&
               a.params.critic.params() == b.params.critic.params();
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    repro = repro && a.curve[i].mean_return == b.curve[i].mean_return;
  }
  require(repro, "bit reproducibility");

  const double secs = seconds_since(t0);
  require(secs < 30.0, "runtime " + fmt(secs, 3) + "s");
  Verdict v;
  v.pass = failures.empty();
  v.detail = "unitarity=" + fmt(unitarity, 2) + " norm drift=" + fmt(drift, 2) + " telescoping=" +
             fmt(tele, 2) + " grad rel err=" + fmt(worst_grad, 2) + " rk4 order=" + fmt(order, 3) +
             " repro=" + (repro ? "yes" : "no") + "; " + fmt(secs, 3) + "s";
  for (const auto& f : failures) v.detail += " FAILED:" + f;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seeds" && i + 1 < argc) {
      g_seeds = std::atoi(argv[++i]);
    } else if (arg == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::atoi(item.c_str()));
    } else {
      std::cerr << "usage: acceptance [--seeds K] [--only 1,2,...] [--out DIR]\n";
      return 2;
    }
  }
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " | " << v.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
