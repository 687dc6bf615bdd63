#pragma once

// What the policy sees: a heading-aligned crop of the heightmap registered to
// the estimated pose, and the pose-uncertainty augmentation built on it.

#include "gradesim/geometry.hpp"
#include "gradesim/terrain.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace gradesim {

/// Window geometry. Row 0 is the far edge (ahead of the dozer), column 0 the
/// left edge. The window center sits `forward_offset` ahead of the pose.
struct WindowSpec {
  int rows = 64;
  int cols = 64;
  double m_per_px = 0.025;
  double forward_offset = 0.75;  // m
};

struct Observation {
  Eigen::MatrixXd window;  // rows x cols heights [m]
  Pose est_pose;
  double t = 0.0;
  WindowSpec spec;
};

enum class ActionKind { kPush, kReposition };

struct WaypointAction {
  Vec2 goto_pt = Vec2::Zero();     // drive target [m]
  Vec2 reverse_to = Vec2::Zero();  // post-push target [m]
  ActionKind kind = ActionKind::kPush;
};

struct AugmentedSample {
  Observation obs;
  WaypointAction labels;  // goto/reverse_to in the sample's body frame (forward, right) [m]
  Pose sample_pose;
};

/// World position of pixel (r, c) for a window registered at `pose`.
Vec2 pixel_to_world(const WindowSpec& spec, const Pose& pose, double r, double c);
/// Inverse of pixel_to_world; returns fractional (row, col).
Vec2 world_to_pixel(const WindowSpec& spec, const Pose& pose, const Vec2& world);

/// Bilinear height at a world point; cells off the map read as target height.
double sample_height(const Heightmap& hm, const Vec2& world);

/// Throws OutOfBounds if the pose is off the map.
Observation render_observation(const Heightmap& hm, const Pose& est_pose, const WindowSpec& spec,
                               double t = 0.0);

/// (forward, right) coordinates of a world point in the frame of `pose`.
Vec2 to_body_frame(const Pose& pose, const Vec2& world);
Vec2 from_body_frame(const Pose& pose, const Vec2& body);

/// (x, y, yaw) block of a 15-state error covariance.
Mat3 pose_marginal(const Eigen::Matrix<double, 15, 15>& P);

struct AugmentOptions {
  int max_redraws = 100;  // per sample, for draws whose center is off the map
  double scale_std = 0.0;  // independent relative pixel-size jitter; 0 disables
};

/// Draws k poses (x, y, yaw) ~ N(est_pose, cov), renders each and expresses
/// the world-frame `action` in every sampled frame. Three normals are drawn
/// per attempt (x, y, yaw), plus one for scale when enabled. A sample that is
/// still off the map after max_redraws falls back to est_pose.
std::vector<AugmentedSample> sample_observations(const Heightmap& hm, const Pose& est_pose,
                                                 const Mat3& cov, int k, std::mt19937_64& rng,
                                                 const WindowSpec& spec,
                                                 const WaypointAction& action = {},
                                                 const AugmentOptions& opts = {});

}  // namespace gradesim
