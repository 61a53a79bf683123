#ifndef SPINRL_IO_HPP_
#define SPINRL_IO_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinrl/baselines.hpp"
#include "spinrl/environment.hpp"
#include "spinrl/evaluation.hpp"
#include "spinrl/ppo.hpp"

namespace spinrl {

inline constexpr int kCheckpointVersion = 1;

const char* code_version();

// Environment + training settings of one run.
struct RunConfig {
  EnvConfig env;
  TrainConfig train;

  void validate() const {
    env.validate();
    train.validate();
  }
};

nlohmann::json to_json(const EnvConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

// Overlays the fields present in j onto cfg. Unknown keys and wrongly typed
// values throw std::invalid_argument naming the field.
void apply_json(const nlohmann::json& j, EnvConfig& cfg);
void apply_json(const nlohmann::json& j, TrainConfig& cfg);

// Builds a RunConfig from system defaults, then the file contents. The
// system and n_atoms are resolved first (override_* win when set) so the
// right defaults apply.
RunConfig resolve_run_config(const nlohmann::json& file, const std::string& override_system,
                             int override_n_atoms);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

struct Checkpoint {
  int version = kCheckpointVersion;
  RunConfig config;
  InitMode init = InitMode::kFixed;
  PolicyParams params;
};

nlohmann::json to_json(const PolicyParams& p);
PolicyParams policy_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
// Throws std::runtime_error on unreadable files or version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// CSV exports.
void write_run_record_csv(std::ostream& os, const RunRecord& rec);
void write_policy_map_csv(std::ostream& os, const PolicyMap& map);
void write_noise_report_csv(std::ostream& os, const NoiseReport& rep);
void write_learning_curve_csv(std::ostream& os, const std::vector<EpochStats>& curve);
void write_generalization_csv(std::ostream& os, const std::vector<GeneralizationRow>& rows);

void write_text_file(const std::filesystem::path& path, const std::string& text);

// Parses the run-record CSV produced above.
RunRecord read_run_record_csv(std::istream& is);

}  // namespace spinrl

#endif  // SPINRL_IO_HPP_
