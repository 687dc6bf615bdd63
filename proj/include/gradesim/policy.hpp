#pragma once

#include "gradesim/observation.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gradesim {

/// Maps an observation to a waypoint action. An empty result means no sand is
/// visible in the window and the caller should survey elsewhere.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::optional<WaypointAction> decide(const Observation& obs) = 0;
};

struct HeuristicOptions {
  double target_h = 0.0;
  double threshold = 0.005;     // m above target counted as sand
  double max_push_angle = 30.0 * kDegToRad;  // off the dump direction before repositioning
  double clearance = 0.12;      // m kept between a repositioned blade and the blob
  double reverse_dist = 0.15;   // m backed off after repositioning
  double min_reposition = 0.05;  // m, shorter repositioning moves become pushes
  double back_off = 0.1;        // m behind the current pose for the post-push reverse
  bool extend_to_dump = true;   // carry the push on to the dump line
  double dump_margin = 0.12;    // m past the dump line
  double edge_margin = 0.15;    // m kept from the map edge
  double dump_edge_margin = 0.05;  // m kept from the far x edge by pushes to the dump
};

/// Largest 4-connected region of the window above the threshold.
struct Blob {
  double volume = 0.0;    // m^3
  Vec2 centroid;          // world, volume weighted
  double min_x = 0.0;     // world extent of the region
  double max_x = 0.0;
  int pixels = 0;
  std::vector<Vec2> points;  // world centers of member pixels
};
std::optional<Blob> largest_blob(const Observation& obs, double target_h, double threshold);

/// Baseline standing in for a trained agent. Pushes the largest visible blob
/// toward +x (the dump side) and repositions first when the blob is too far
/// off the push direction.
class HeuristicPolicy : public Policy {
 public:
  HeuristicPolicy(const HeuristicOptions& opts, Vec2 map_extent, double dump_x);
  std::optional<WaypointAction> decide(const Observation& obs) override;

 private:
  Vec2 clamp_to_map(const Vec2& p) const;

  HeuristicOptions opts_;
  Vec2 extent_;
  double dump_x_;
};

/// FNV-1a over the window contents, printed as 16 hex digits.
std::string observation_hash(const Observation& obs);

struct ReplayRecord {
  std::string obs_hash;
  WaypointAction action;
};

/// Replays decisions recorded by an external policy (JSON lines with
/// obs_hash, goto, reverse_to and optional kind). A record whose hash matches
/// the observation wins; otherwise the next unused record in file order is
/// used, or nothing when `strict` is set or the file is exhausted.
class ReplayPolicy : public Policy {
 public:
  explicit ReplayPolicy(std::vector<ReplayRecord> records, bool strict = false);
  static ReplayPolicy load(const std::filesystem::path& path, bool strict = false);
  std::optional<WaypointAction> decide(const Observation& obs) override;

 private:
  std::vector<ReplayRecord> records_;
  std::vector<bool> used_;
  std::unordered_map<std::string, std::size_t> by_hash_;
  std::size_t cursor_ = 0;
  bool strict_;
};

void write_replay_record(std::ostream& os, const ReplayRecord& rec);

enum class FollowPhase { kDrive, kReverse, kDone };

struct FollowerParams {
  double gain = 2.0;              // rad/s per rad of heading error
  double max_turn_rate = kPi / 2;  // rad/s
  double speed = 0.3;             // m/s
  double capture_radius = 0.0375;  // m
  // Inside this distance, a heading error above slow_turn_angle stops the
  // dozer so it turns in place instead of circling the waypoint.
  double slow_radius = 0.1;
  double slow_turn_angle = 20.0 * kDegToRad;
  // A goal closer than this that has fallen behind the heading counts as
  // reached, so localization noise larger than the capture radius does not
  // leave the dozer circling it. 0 disables.
  double pass_radius = 0.1;
};

struct FollowerState {
  Vec2 target = Vec2::Zero();
  Vec2 reverse_to = Vec2::Zero();
  FollowPhase phase = FollowPhase::kDrive;
  double elapsed = 0.0;  // s in this leg
  double budget = 60.0;  // s
};

struct FollowCommand {
  double dpsi = 0.0;   // heading change for this step [rad]
  double speed = 0.0;  // signed, negative when reversing [m/s]
  bool phase_changed = false;
  bool timed_out = false;
};

FollowerState start_leg(const WaypointAction& a, const Pose& est_pose, const FollowerParams& p,
                        double budget_factor = 3.0, double budget_slack = 10.0);

/// Proportional heading control toward the current target using the
/// estimated pose only. Arrival inside the capture radius advances the phase
/// and commands zero motion for that step.
FollowCommand follow_step(FollowerState& f, const Pose& est_pose, double dt,
                          const FollowerParams& p);

}  // namespace gradesim
