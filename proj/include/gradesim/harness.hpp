#pragma once

#include "gradesim/config.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gradesim {

struct RolloutRecord {
  int level = 0;
  int index = 0;
  std::uint64_t seed = 0;
  GradeMetrics metrics;
  double initial_volume = 0.0;
  std::vector<bool> push_success;  // one flag per scored push leg
  bool diverged = false;
  std::string termination;
  bool failed = false;  // the rollout threw; `error` says why
  std::string error;
  std::vector<std::string> files;  // relative to the output directory
};

struct LevelSummary {
  std::string name;
  double yaw_deg = 0.0;
  int completed = 0;
  int failed = 0;
  double time_mean = 0.0, time_std = 0.0;
  double uncleared_mean = 0.0, uncleared_std = 0.0;
  int push_legs = 0;
  int successes = 0;
  double success_rate = 0.0;
  double divergence_rate = 0.0;  // over completed rollouts
  std::vector<RolloutRecord> rollouts;
};

struct ScenarioSummary {
  ScenarioConfig config;
  std::vector<LevelSummary> levels;

  bool any_failed() const;
  bool any_diverged() const;
};

/// Seed of rollout `index`; the same for every level so levels are paired.
std::uint64_t rollout_seed(std::uint64_t base, int index);
/// The episode a rollout plays: shared when fixed_episode is set, else drawn
/// from the rollout's own episode stream.
Episode episode_for_rollout(const ScenarioConfig& cfg, std::uint64_t seed);

/// Runs one rollout. Exceptions are caught and recorded in the record.
RolloutRecord run_rollout(const ScenarioConfig& cfg, const NoiseLevel& level, int level_index,
                          int index, const std::filesystem::path& out_dir);

/// All levels x rollouts, fanned out over cfg.threads workers and merged in
/// (level, index) order. Writes summary.json and rollouts.csv to cfg.output
/// and per-rollout artifacts below it when enabled.
ScenarioSummary run_scenario(const ScenarioConfig& cfg);

/// Recomputes the level statistics from its rollout records.
void aggregate(LevelSummary& level);

nlohmann::json to_json(const ScenarioSummary& s);
void write_summary(const std::filesystem::path& dir, const ScenarioSummary& s);

struct MetricDelta {
  int pairs = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double mean_delta = 0.0;  // b - a, paired
  double relative = 0.0;    // mean_b / mean_a - 1
  int positive = 0, negative = 0, ties = 0;
  double p_value = 1.0;
};

struct LevelDelta {
  std::string a, b;
  MetricDelta episode_time;
  MetricDelta uncleared_volume;
};

/// Paired-seed deltas between two summaries. Levels pair by position, or one
/// single-level summary is paired against every level of the other.
/// Throws MismatchedEnv when the environment specs differ.
std::vector<LevelDelta> compare_summaries(const nlohmann::json& a, const nlohmann::json& b);
nlohmann::json to_json(const std::vector<LevelDelta>& d);

}  // namespace gradesim
