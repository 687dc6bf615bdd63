#pragma once

// Scenario configuration. The file is JSON; every physical key carries its
// unit in the name (cm, cm/s, deg, ...) and is converted to SI on load.

#include "gradesim/episode.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gradesim {

enum class Scenario { kNoiseLess, kSensorFusion, kExtreme, kYawSweep };
const char* to_string(Scenario s);
/// Throws ConfigError("scenario", ...) for unknown names.
Scenario parse_scenario(const std::string& name);

enum class RMode { kMatched, kFixed };
enum class PolicyKind { kHeuristic, kReplay };

/// How the filter's noise model relates to the injected noise.
struct FilterSpec {
  RMode r_mode = RMode::kMatched;
  Vec3 fixed_r_pos = Vec3::Zero();  // m, used when r_mode is fixed
  Vec3 fixed_r_att = Vec3::Zero();  // rad
  double r_floor = 1e-5;
  double q_pos = 0.0;
  double q_vel = 0.0;
  double q_att = 0.0;
  double q_bias = 1e-12;
  FilterOptions options;
};

/// One noise level of a scenario; the yaw sweep has several.
struct NoiseLevel {
  std::string name;
  double yaw_deg = 0.0;  // aiding yaw std for the sweep, informational otherwise
  NoiseConfig noise;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::kSensorFusion;
  NoiseConfig noise;
  FilterSpec filter;
  std::vector<double> sweep_yaw_deg;  // yaw_sweep only

  int rollouts = 50;
  std::uint64_t seed = 1;
  bool fixed_episode = true;
  std::uint64_t episode_seed = 0;
  int threads = 0;  // 0: hardware concurrency
  std::filesystem::path output = "out";
  bool write_artifacts = true;  // per-rollout trajectory CSV and map snapshots

  SpawnSpec spawn;
  DozerBody dozer;
  EpisodeConfig episode;  // noise and tuning inside are filled per level
  PolicyKind policy = PolicyKind::kHeuristic;
  std::filesystem::path replay_file;
  HeuristicOptions heuristic;
  double follower_capture_cells = 1.5;
  int dataset_k = 8;
  AugmentOptions augment;

  std::vector<NoiseLevel> levels() const;
  FilterTuning tuning_for(const NoiseConfig& noise) const;
  EpisodeConfig episode_for(const NoiseLevel& level) const;
  /// Cross-field checks; throws ConfigError with the key path.
  void validate() const;
};

/// Scenario noise levels on top of the library defaults.
ScenarioConfig preset(Scenario s);

struct CliOverrides {
  std::optional<std::string> scenario;
  std::optional<int> rollouts;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
};

/// Preset for the scenario (override, then file, then sensor_fusion), then the
/// file's keys, then the overrides. Unknown keys, wrong types and invalid
/// values raise ConfigError naming the key path.
ScenarioConfig parse_config(const nlohmann::json& j, const CliOverrides& o = {});
ScenarioConfig load_config(const std::filesystem::path& path, const CliOverrides& o = {});

/// Effective configuration in file units; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ScenarioConfig& c);
/// The part of the configuration that defines the environment; two summaries
/// can only be compared when these agree.
nlohmann::json env_spec(const ScenarioConfig& c);

}  // namespace gradesim
