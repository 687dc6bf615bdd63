#pragma once

// Closed-loop grading episode: the policy decides on observations rendered at
// the estimated pose, the follower drives on the estimated pose, and the true
// dozer moves the sand while the INS + filter track it from noisy sensors.

#include "gradesim/eskf.hpp"
#include "gradesim/noise.hpp"
#include "gradesim/observation.hpp"
#include "gradesim/policy.hpp"
#include "gradesim/terrain.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gradesim {

struct EpisodeConfig {
  double imu_rate = 100.0;  // Hz
  double aid_rate = 1.0;    // Hz, must divide imu_rate
  NoiseConfig noise;
  FilterTuning tuning;
  FollowerParams follower;
  WindowSpec window;
  TerrainRules rules;
  double max_time = 300.0;        // s
  double clear_fraction = 0.02;   // stop once uncleared < this share of the start
  double leg_budget_factor = 3.0;
  double leg_budget_slack = 10.0;  // s
  // Survey stations are every (x, y) pair, x-major. The window reaches about
  // 1.55 m ahead, so two x stations see the whole map up to the dump line.
  std::vector<double> survey_xs = {0.25, 1.0};             // m
  std::vector<double> survey_lanes = {0.45, 1.25, 2.05};  // y of survey lanes [m]
  // End the episode once every station has been surveyed without seeing
  // sand. Off: stations repeat until the map is cleared or the time budget
  // runs out.
  bool stop_after_survey = false;
  int log_every = 10;              // trajectory log decimation, in IMU steps
  bool check_conservation = false;  // per-step volume audit (slow)
};

struct LegRecord {
  int index = 0;
  ActionKind kind = ActionKind::kPush;
  bool survey = false;
  double start_t = 0.0;
  double duration = 0.0;
  double peak_load = 0.0;  // largest blade load in the drive phase [m^3]
  bool success = false;    // push legs only
  WaypointAction action;
};

struct TrajectoryLogRow {
  double t = 0.0;
  Pose truth;
  Pose estimate;
  double blade_load = 0.0;
};

enum class Termination { kCleared, kTimeBudget, kNoSandVisible, kDiverged };
const char* to_string(Termination t);

struct EpisodeResult {
  GradeMetrics metrics;
  std::vector<LegRecord> legs;
  Termination termination = Termination::kTimeBudget;
  bool diverged = false;
  std::string divergence_reason;
  double initial_volume = 0.0;    // uncleared at the start [m^3]
  double dumped = 0.0;            // m^3
  double max_conservation_error = 0.0;  // relative to the initial total, when audited
  long steps = 0;
  long wall_contacts = 0;  // IMU steps in which the sandbox wall blocked the dozer
  std::vector<TrajectoryLogRow> log;
  Heightmap final_map;
};

/// Everything the episode owns while running.
struct EpisodeState {
  EpisodeState(Heightmap m, DozerBody d, FusionFilter f, const TrajectorySample& first, double g,
               RolloutRng& r)
      : map(std::move(m)), dozer(d), filter(std::move(f)), last_sample(first), synth(first, g),
        rng(&r) {}

  Heightmap map;
  DozerBody dozer;
  FusionFilter filter;
  TrajectorySample last_sample;
  ImuSynthesizer synth;
  RolloutRng* rng = nullptr;
  long step = 0;
  long wall_contacts = 0;
  double initial_volume = 0.0;
  double initial_total = 0.0;
  double dumped = 0.0;
  double max_conservation_error = 0.0;
  std::size_t next_lane = 0;
  bool terminated = false;
  Termination termination = Termination::kTimeBudget;
  std::string divergence_reason;
  std::vector<LegRecord> legs;
  std::vector<TrajectoryLogRow> log;

  double t(double imu_rate) const { return static_cast<double>(step) / imu_rate; }
};

/// Builds the state for `ep`: corrupted initial conditions, a filter seeded
/// from cfg.tuning, and the synthesizer at the start pose at rest.
EpisodeState start_episode(const Episode& ep, const EpisodeConfig& cfg, RolloutRng& rng);

struct LegEvents {
  LegRecord leg;
  bool diverged = false;
  bool terminated = false;
};

/// Executes one action (drive, then reverse) at the IMU rate. Records the leg,
/// flags divergence when the follower runs out of time or the dozer leaves
/// the map, and checks the termination conditions afterwards.
LegEvents step_episode(EpisodeState& s, const WaypointAction& action, const EpisodeConfig& cfg,
                       bool survey = false);

/// Called once per policy decision (survey legs excluded) with the map as it
/// stands, the observation, the chosen action and the filter covariance.
using DecisionHook = std::function<void(const Heightmap& map, const Observation&,
                                        const WaypointAction&, const Mat15& P, int leg_index)>;

/// Full episode under `policy`, surveying lanes when no sand is visible.
/// Survey legs are skipped while no lane is configured.
EpisodeResult run_episode(const Episode& ep, Policy& policy, const EpisodeConfig& cfg,
                          RolloutRng& rng, const DecisionHook& hook = {});

void write_log_csv(const std::filesystem::path& path, const std::vector<TrajectoryLogRow>& log);

}  // namespace gradesim
