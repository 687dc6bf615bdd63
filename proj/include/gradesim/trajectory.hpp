#pragma once

#include "gradesim/geometry.hpp"

#include <filesystem>
#include <vector>

namespace gradesim {

inline constexpr double kStandardGravity = 9.80665;  // m/s^2

struct TrajectorySample {
  double t = 0.0;  // s
  Pose pose;
  Vec3 v = Vec3::Zero();  // navigation-frame velocity [m/s]
};

/// Angular (q_t, stacked roll/pitch/yaw) and velocity (q_v) increments in body frame.
struct ImuIncrements {
  Vec3 q_t = Vec3::Zero();  // rad
  Vec3 q_v = Vec3::Zero();  // m/s
  double dt = 0.0;          // s
};

struct LegOptions {
  double t0 = 0.0;
  double turn_rate = kPi / 2.0;  // rad/s, sets the duration of rotation-dominated legs
  double min_distance = 0.025;   // m, below this a leg must rotate
  InterpolationMode attitude_mode = InterpolationMode::kRelative;
};

/// Straight-line constant-speed leg sampled at `rate_hz`. The end pose itself
/// is not emitted; it is the first sample of the following leg. Throws
/// DegenerateLeg when the leg neither translates nor rotates.
std::vector<TrajectorySample> generate_leg_trajectory(const Pose& start, const Pose& end,
                                                      double speed, double rate_hz,
                                                      const LegOptions& opts = {});

/// Concatenates legs through `waypoints` and appends the final waypoint as the last sample.
std::vector<TrajectorySample> generate_path_trajectory(const std::vector<Pose>& waypoints,
                                                       double speed, double rate_hz,
                                                       const LegOptions& opts = {});

/// Streaming form of the increment generation: feed true samples one at a time.
class ImuSynthesizer {
 public:
  ImuSynthesizer(const TrajectorySample& first, double g = kStandardGravity);

  /// Increment between the previous sample and `next`; `dt` is next.t - previous.t.
  ImuIncrements push(const TrajectorySample& next);

 private:
  Vec3 prev_p_;
  Vec3 prev_v_;
  Dcm prev_d_nb_;
  double prev_t_;
  double g_;
};

/// Clean inertial increments from a uniformly sampled trajectory. The output
/// has one element fewer than the input; the first sample's velocity is taken
/// from the trajectory and later velocities from position differences.
/// Throws NonUniformSampling if the sample interval varies by more than 1e-9 s.
std::vector<ImuIncrements> generate_imu_increments(const std::vector<TrajectorySample>& traj,
                                                   double g = kStandardGravity);

/// CSV with header t,x,y,z,psi,theta,phi,vx,vy,vz; SI units, full precision.
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectorySample>& traj);
std::vector<TrajectorySample> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace gradesim
