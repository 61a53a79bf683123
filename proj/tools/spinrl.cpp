#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinrl/baselines.hpp"
#include "spinrl/evaluation.hpp"
#include "spinrl/io.hpp"
#include "spinrl/ppo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spinrl;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::string system;
  int n_atoms = 0;
  std::string init;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--system", f.system, "meanfield | quantum")
      ->check(CLI::IsMember({"meanfield", "quantum"}));
  cmd->add_option("--n-atoms", f.n_atoms, "atom number N (quantum)");
  cmd->add_option("--init", f.init, "fixed | random")->check(CLI::IsMember({"fixed", "random"}));
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
}

RunConfig resolve(const ConfigFlags& f) {
  const json file = f.config_path.empty() ? json::object() : read_json_file(f.config_path);
  RunConfig cfg = resolve_run_config(file, f.system, f.n_atoms);
  if (!f.init.empty()) cfg.env.init = parse_init(f.init);
  if (f.seed) cfg.train.seed = *f.seed;
  cfg.train.workers = f.workers;
  cfg.validate();
  return cfg;
}

void write_csv(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  write_text_file(path, os.str());
}

json manifest(const std::string& command, const RunConfig& cfg, const std::vector<std::string>& outputs,
              int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return {{"command", command},
          {"argv", args},
          {"config", to_json(cfg)},
          {"seed", cfg.train.seed},
          {"code_version", code_version()},
          {"outputs", outputs}};
}

json record_summary(const RunRecord& rec) {
  json j = {{"final_fidelity", rec.final_fidelity()},
            {"max_fidelity", rec.max_fidelity()},
            {"final_rho0", rec.rows.back().rho0},
            {"final_time", rec.rows.back().t}};
  const auto t99 = rec.first_time_reaching(0.99);
  j["time_to_0.99"] = t99 ? json(*t99) : json(nullptr);
  return j;
}

std::unique_ptr<Environment> start_env(const EnvConfig& cfg, std::uint64_t seed) {
  auto env = make_environment(cfg);
  env->reset(cfg.init, split_seed(seed, "reset"));
  return env;
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const int n = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("n-list: bad entry '" + item + "'");
    require_even_atoms(n);
    out.push_back(n);
  }
  if (out.empty()) throw std::invalid_argument("n-list: empty");
  return out;
}

int run_train(const ConfigFlags& flags, std::optional<int> epochs, bool quiet,
              const fs::path& out, int argc, char** argv) {
  RunConfig cfg = resolve(flags);
  if (epochs) {
    cfg.train.total_epochs = *epochs;
    cfg.train.validate();
  }
  const EnvConfig env_cfg = cfg.env;
  TrainResult result = train([env_cfg] { return make_environment(env_cfg); }, cfg.train,
                             env_cfg.init, [&](const EpochStats& s, const PolicyParams&) {
                               if (!quiet && (s.epoch % 10 == 0 || s.epoch + 1 == cfg.train.total_epochs)) {
                                 std::cerr << "epoch " << s.epoch << " return " << s.mean_return
                                           << " fidelity " << s.mean_final_fidelity << '\n';
                               }
                             });

  EnvConfig eval_cfg = cfg.env;
  eval_cfg.init = InitMode::kFixed;
  auto env = start_env(eval_cfg, cfg.train.seed);
  const RunRecord rec = rollout(*env, result.params, true);

  fs::create_directories(out);
  save_checkpoint(out / "checkpoint.json", {kCheckpointVersion, cfg, cfg.env.init, result.params});
  write_csv(out / "learning_curve.csv",
            [&](std::ostream& os) { write_learning_curve_csv(os, result.curve); });
  write_csv(out / "rollout.csv", [&](std::ostream& os) { write_run_record_csv(os, rec); });
  write_json_file(out / "summary.json", record_summary(rec));
  write_json_file(out / "manifest.json",
                  manifest("train", cfg,
                           {"checkpoint.json", "learning_curve.csv", "rollout.csv", "summary.json"},
                           argc, argv));
  std::cout << "final_fidelity " << rec.final_fidelity() << '\n';
  return 0;
}

struct EvalFlags {
  std::string checkpoint;
  std::string mode = "rollout";
  std::optional<double> sigma;
  int samples = 100;
  std::string n_list = "4,6,8,10,12,14,16,18,20";
  int n_theta = 101;
  int n_rho = 101;
  std::string init;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

int run_eval(const EvalFlags& f, const fs::path& out, int argc, char** argv) {
  const Checkpoint ck = load_checkpoint(f.checkpoint);
  RunConfig cfg = ck.config;
  cfg.env.init = f.init.empty() ? InitMode::kFixed : parse_init(f.init);
  if (f.seed) cfg.train.seed = *f.seed;
  cfg.train.workers = f.workers;
  const PolicyParams& policy = ck.params;

  if (f.mode == "generalize" && cfg.env.system != SystemKind::kQuantum) {
    throw std::invalid_argument("generalize requires a quantum-system checkpoint");
  }
  if (f.sigma && *f.sigma < 0.0) throw std::invalid_argument("sigma: must be >= 0");
  if (f.samples < 1) throw std::invalid_argument("samples: must be >= 1");

  std::vector<std::string> outputs;
  json summary = {{"mode", f.mode}};
  if (f.mode == "rollout") {
    auto env = start_env(cfg.env, cfg.train.seed);
    const RunRecord rec = rollout(*env, policy, true);
    fs::create_directories(out);
    write_csv(out / "rollout.csv", [&](std::ostream& os) { write_run_record_csv(os, rec); });
    summary.update(record_summary(rec));
    outputs.push_back("rollout.csv");
  } else if (f.mode == "map") {
    const PolicyMap map = policy_map(policy, f.n_theta, f.n_rho);
    fs::create_directories(out);
    write_csv(out / "policy_map.csv", [&](std::ostream& os) { write_policy_map_csv(os, map); });
    summary["n_theta"] = f.n_theta;
    summary["n_rho"] = f.n_rho;
    outputs.push_back("policy_map.csv");
  } else if (f.mode == "noise") {
    const double sigma = f.sigma.value_or(0.1 * std::abs(cfg.env.c2));
    auto env = start_env(cfg.env, cfg.train.seed);
    const NoiseReport rep =
        noise_eval(*env, policy, sigma, f.samples, split_seed(cfg.train.seed, "noise"), f.workers);
    fs::create_directories(out);
    write_csv(out / "noise.csv", [&](std::ostream& os) { write_noise_report_csv(os, rep); });
    summary["sigma"] = sigma;
    summary["samples"] = f.samples;
    summary["final_mean_fidelity"] = rep.final_mean();
    summary["final_std_fidelity"] = rep.final_std();
    outputs.push_back("noise.csv");
  } else if (f.mode == "generalize") {
    const std::vector<int> ns = parse_n_list(f.n_list);
    const auto rows = generalize(policy, cfg.env, ns, f.workers);
    fs::create_directories(out);
    write_csv(out / "generalization.csv",
              [&](std::ostream& os) { write_generalization_csv(os, rows); });
    summary["n_list"] = ns;
    outputs.push_back("generalization.csv");
  } else {
    throw std::invalid_argument("mode: unknown '" + f.mode + "'");
  }
  write_json_file(out / "summary.json", summary);
  outputs.push_back("summary.json");
  json m = manifest("eval", cfg, outputs, argc, argv);
  m["checkpoint"] = f.checkpoint;
  write_json_file(out / "manifest.json", m);
  return 0;
}

struct BaselineFlags {
  std::string which = "greedy";
  std::optional<double> q;
  int grid_points = 49;
};

int run_baseline(const ConfigFlags& cf, const BaselineFlags& f, const fs::path& out, int argc,
                 char** argv) {
  const RunConfig cfg = resolve(cf);
  if (f.which == "analytic" && cfg.env.system != SystemKind::kMeanField) {
    throw std::invalid_argument("analytic baseline applies only to the mean-field system");
  }
  if (f.which == "constant" && !f.q) throw std::invalid_argument("constant baseline needs --q");
  if (f.grid_points < 2) throw std::invalid_argument("grid-points: must be >= 2");

  auto env = start_env(cfg.env, cfg.train.seed);
  RunRecord rec;
  json summary = {{"which", f.which}};
  if (f.which == "greedy") {
    const auto grid = linspace(cfg.env.q_min, cfg.env.q_max, f.grid_points);
    rec = greedy_rollout(*env, grid);
    summary["grid_points"] = f.grid_points;
  } else if (f.which == "ramp") {
    const RampSearchResult res = ramp_search(*env, cf.workers);
    rec = res.record;
    summary["best"] = {{"q_i", res.best.q_initial},
                       {"q_f", res.best.q_final},
                       {"t_ramp", res.best.ramp_time}};
    summary["evaluated"] = res.evaluated;
  } else if (f.which == "analytic") {
    rec = analytic_meanfield_rollout(*env);
  } else if (f.which == "constant") {
    rec = constant_q_rollout(*env, *f.q);
    summary["q"] = *f.q;
  } else {
    throw std::invalid_argument("which: unknown '" + f.which + "'");
  }
  summary.update(record_summary(rec));

  fs::create_directories(out);
  write_csv(out / "record.csv", [&](std::ostream& os) { write_run_record_csv(os, rec); });
  write_json_file(out / "summary.json", summary);
  write_json_file(out / "manifest.json",
                  manifest("baseline", cfg, {"record.csv", "summary.json"}, argc, argv));
  std::cout << "final_fidelity " << rec.final_fidelity() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPO control of spin-1 condensates: training, evaluation and baselines"};
  app.set_version_flag("--version", std::string(code_version()));
  app.require_subcommand(1);

  ConfigFlags train_flags;
  std::optional<int> epochs;
  bool quiet = false;
  std::string train_out = "runs/train";
  CLI::App* train_cmd = app.add_subcommand("train", "train a policy with PPO");
  add_config_flags(train_cmd, train_flags);
  train_cmd->add_option("--epochs", epochs, "override total_epochs");
  train_cmd->add_flag("--quiet", quiet, "no progress output");
  train_cmd->add_option("--out", train_out, "output directory");

  EvalFlags eval_flags;
  std::string eval_out = "runs/eval";
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_flags.checkpoint, "checkpoint.json")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--mode", eval_flags.mode, "rollout | map | noise | generalize")
      ->check(CLI::IsMember({"rollout", "map", "noise", "generalize"}));
  eval_cmd->add_option("--sigma", eval_flags.sigma, "noise strength (default 0.1|c2|)");
  eval_cmd->add_option("--samples", eval_flags.samples, "noise samples");
  eval_cmd->add_option("--n-list", eval_flags.n_list, "comma-separated atom numbers");
  eval_cmd->add_option("--n-theta", eval_flags.n_theta, "map grid along theta_s");
  eval_cmd->add_option("--n-rho", eval_flags.n_rho, "map grid along rho0");
  eval_cmd->add_option("--init", eval_flags.init, "fixed | random")
      ->check(CLI::IsMember({"fixed", "random"}));
  eval_cmd->add_option("--seed", eval_flags.seed, "root seed");
  eval_cmd->add_option("--workers", eval_flags.workers, "worker threads")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", eval_out, "output directory");

  ConfigFlags base_flags;
  BaselineFlags baseline;
  std::string base_out = "runs/baseline";
  CLI::App* base_cmd = app.add_subcommand("baseline", "run a reference protocol");
  add_config_flags(base_cmd, base_flags);
  base_cmd->add_option("--which", baseline.which, "greedy | ramp | analytic | constant")
      ->check(CLI::IsMember({"greedy", "ramp", "analytic", "constant"}));
  base_cmd->add_option("--q", baseline.q, "control for the constant protocol");
  base_cmd->add_option("--grid-points", baseline.grid_points, "greedy grid size");
  base_cmd->add_option("--out", base_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return run_train(train_flags, epochs, quiet, train_out, argc, argv);
    if (*eval_cmd) return run_eval(eval_flags, eval_out, argc, argv);
    if (*base_cmd) return run_baseline(base_flags, baseline, base_out, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
