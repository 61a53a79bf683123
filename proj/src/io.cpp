#include "spinrl/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#ifndef SPINRL_VERSION
#define SPINRL_VERSION "unknown"
#endif

namespace spinrl {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(key + ": " + e.what());
  }
}

std::vector<double> vector_of(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd eigen_of(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mlp_to_json(const Mlp& m) {
  std::vector<int> hidden(m.layer_sizes().begin() + 1, m.layer_sizes().end() - 1);
  return {{"input_size", m.input_size()},
          {"hidden_sizes", hidden},
          {"output_size", m.output_size()},
          {"output_activation", m.output_activation() == OutputActivation::kTanh ? "tanh" : "linear"},
          {"params", vector_of(m.params())}};
}

Mlp mlp_from_json(const json& j) {
  const std::string act = field<std::string>(j, "output_activation");
  Mlp m(field<int>(j, "input_size"), field<std::vector<int>>(j, "hidden_sizes"),
        field<int>(j, "output_size"),
        act == "tanh" ? OutputActivation::kTanh : OutputActivation::kLinear);
  const auto params = field<std::vector<double>>(j, "params");
  if (static_cast<Eigen::Index>(params.size()) != m.num_params()) {
    throw std::runtime_error("checkpoint: parameter count does not match layer sizes");
  }
  m.params() = eigen_of(params);
  return m;
}

void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << v;
    first = false;
  }
  os << '\n';
}

}  // namespace

const char* code_version() { return SPINRL_VERSION; }

json to_json(const EnvConfig& cfg) {
  return {{"system", to_string(cfg.system)}, {"n_atoms", cfg.n_atoms},
          {"c2", cfg.c2},                    {"q_min", cfg.q_min},
          {"q_max", cfg.q_max},              {"dt", cfg.dt},
          {"steps", cfg.steps},              {"reward", to_string(cfg.reward)},
          {"init", to_string(cfg.init)}};
}

json to_json(const TrainConfig& cfg) {
  return {{"hidden_sizes", cfg.hidden_sizes},
          {"gamma", cfg.gamma},
          {"lr_actor", cfg.lr_actor},
          {"lr_critic", cfg.lr_critic},
          {"target_kl", cfg.target_kl},
          {"clip_ratio", cfg.clip_ratio},
          {"gae_lambda", cfg.gae_lambda},
          {"epochs_per_update", cfg.epochs_per_update},
          {"episodes_per_epoch", cfg.episodes_per_epoch},
          {"total_epochs", cfg.total_epochs},
          {"seed", cfg.seed},
          {"workers", cfg.workers}};
}

json to_json(const RunConfig& cfg) {
  json j = to_json(cfg.env);
  j["train"] = to_json(cfg.train);
  return j;
}

void apply_json(const json& j, EnvConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "system") cfg.system = parse_system(field<std::string>(j, key));
    else if (key == "n_atoms") cfg.n_atoms = field<int>(j, key);
    else if (key == "c2") cfg.c2 = field<double>(j, key);
    else if (key == "q_min") cfg.q_min = field<double>(j, key);
    else if (key == "q_max") cfg.q_max = field<double>(j, key);
    else if (key == "dt") cfg.dt = field<double>(j, key);
    else if (key == "steps") cfg.steps = field<int>(j, key);
    else if (key == "reward") cfg.reward = parse_reward(field<std::string>(j, key));
    else if (key == "init") cfg.init = parse_init(field<std::string>(j, key));
    else if (key == "train") continue;
    else throw std::invalid_argument(key + ": unknown config field");
  }
}

void apply_json(const json& j, TrainConfig& cfg) {
  if (!j.is_object()) throw std::invalid_argument("train: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "hidden_sizes") cfg.hidden_sizes = field<std::vector<int>>(j, key);
    else if (key == "gamma") cfg.gamma = field<double>(j, key);
    else if (key == "lr_actor") cfg.lr_actor = field<double>(j, key);
    else if (key == "lr_critic") cfg.lr_critic = field<double>(j, key);
    else if (key == "target_kl") cfg.target_kl = field<double>(j, key);
    else if (key == "clip_ratio") cfg.clip_ratio = field<double>(j, key);
    else if (key == "gae_lambda") cfg.gae_lambda = field<double>(j, key);
    else if (key == "epochs_per_update") cfg.epochs_per_update = field<int>(j, key);
    else if (key == "episodes_per_epoch") cfg.episodes_per_epoch = field<int>(j, key);
    else if (key == "total_epochs") cfg.total_epochs = field<int>(j, key);
    else if (key == "seed") cfg.seed = field<std::uint64_t>(j, key);
    else if (key == "workers") cfg.workers = field<int>(j, key);
    else throw std::invalid_argument("train." + key + ": unknown config field");
  }
}

RunConfig resolve_run_config(const json& file, const std::string& override_system,
                             int override_n_atoms) {
  SystemKind system = SystemKind::kMeanField;
  int n_atoms = 2;
  if (file.is_object()) {
    if (file.contains("system")) system = parse_system(field<std::string>(file, "system"));
    if (file.contains("n_atoms")) n_atoms = field<int>(file, "n_atoms");
  }
  if (!override_system.empty()) system = parse_system(override_system);
  if (override_n_atoms > 0) n_atoms = override_n_atoms;

  RunConfig cfg{default_env_config(system, n_atoms), default_train_config(system, n_atoms)};
  if (file.is_object()) {
    apply_json(file, cfg.env);
    if (file.contains("train")) apply_json(file.at("train"), cfg.train);
  }
  cfg.env.system = system;
  cfg.env.n_atoms = n_atoms;
  return cfg;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json to_json(const PolicyParams& p) {
  return {{"actor", mlp_to_json(p.actor)},
          {"log_std", p.log_std},
          {"critic", mlp_to_json(p.critic)},
          {"q_min", p.q_min},
          {"q_max", p.q_max}};
}

PolicyParams policy_from_json(const json& j) {
  PolicyParams p;
  p.actor = mlp_from_json(j.at("actor"));
  p.critic = mlp_from_json(j.at("critic"));
  p.log_std = field<double>(j, "log_std");
  p.q_min = field<double>(j, "q_min");
  p.q_max = field<double>(j, "q_max");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json j = {{"format", "spinrl-checkpoint"},
            {"version", ck.version},
            {"code_version", code_version()},
            {"config", to_json(ck.config)},
            {"init", to_string(ck.init)},
            {"seed", ck.config.train.seed},
            {"policy", to_json(ck.params)}};
  write_json_file(path, j);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    if (j.value("format", "") != "spinrl-checkpoint") {
      throw std::runtime_error("not a spinrl checkpoint");
    }
    Checkpoint ck;
    ck.version = j.at("version").get<int>();
    if (ck.version != kCheckpointVersion) {
      throw std::runtime_error("unsupported checkpoint version " + std::to_string(ck.version));
    }
    ck.config = resolve_run_config(j.at("config"), "", 0);
    ck.init = parse_init(j.at("init").get<std::string>());
    ck.params = policy_from_json(j.at("policy"));
    return ck;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_run_record_csv(std::ostream& os, const RunRecord& rec) {
  os << std::setprecision(17) << "t,q,rho0,theta_s,fidelity\n";
  for (const auto& r : rec.rows) write_row(os, {r.t, r.q, r.rho0, r.theta_s, r.fidelity});
}

void write_policy_map_csv(std::ostream& os, const PolicyMap& map) {
  os << std::setprecision(17) << "rho0\\theta_s";
  for (double th : map.theta_nodes) os << ',' << th;
  os << '\n';
  for (std::size_t i = 0; i < map.rho_nodes.size(); ++i) {
    os << map.rho_nodes[i];
    for (Eigen::Index j = 0; j < map.mean_action.cols(); ++j) {
      os << ',' << map.mean_action(static_cast<Eigen::Index>(i), j);
    }
    os << '\n';
  }
}

void write_noise_report_csv(std::ostream& os, const NoiseReport& rep) {
  os << std::setprecision(17) << "t,mean_fidelity,std_fidelity\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    write_row(os, {rep.times[i], rep.mean_fidelity[i], rep.std_fidelity[i]});
  }
}

void write_learning_curve_csv(std::ostream& os, const std::vector<EpochStats>& curve) {
  os << std::setprecision(17) << "epoch,mean_return,mean_final_fidelity,approx_kl\n";
  for (const auto& s : curve) {
    os << s.epoch << ',' << s.mean_return << ',' << s.mean_final_fidelity << ',' << s.approx_kl
       << '\n';
  }
}

void write_generalization_csv(std::ostream& os, const std::vector<GeneralizationRow>& rows) {
  os << std::setprecision(17) << "n_atoms,final_fidelity,max_fidelity\n";
  for (const auto& r : rows) {
    os << r.n_atoms << ',' << r.final_fidelity << ',' << r.max_fidelity << '\n';
  }
}

RunRecord read_run_record_csv(std::istream& is) {
  RunRecord rec;
  std::string line;
  if (!std::getline(is, line) || line != "t,q,rho0,theta_s,fidelity") {
    throw std::runtime_error("run record: bad header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    RunRow r;
    char c1, c2, c3, c4;
    if (!(ss >> r.t >> c1 >> r.q >> c2 >> r.rho0 >> c3 >> r.theta_s >> c4 >> r.fidelity)) {
      throw std::runtime_error("run record: malformed row '" + line + "'");
    }
    rec.rows.push_back(r);
  }
  if (rec.rows.size() >= 2) rec.dt = rec.rows[1].t - rec.rows[0].t;
  return rec;
}

}  // namespace spinrl
