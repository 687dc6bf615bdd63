#pragma once

#include "gradesim/geometry.hpp"
#include "gradesim/trajectory.hpp"

namespace gradesim {

/// 15-element error state. Position, attitude and velocity errors are
/// "estimate minus truth" for p and v and "truth relative to estimate" for the
/// attitude rotation; bias errors are the bias still left uncompensated.
/// Feedback therefore subtracts dp/dv, composes dpsi and adds db_c/dd_c.
struct ErrorState {
  Vec3 dp = Vec3::Zero();
  Vec3 dpsi = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 db_c = Vec3::Zero();
  Vec3 dd_c = Vec3::Zero();

  using Vector = Eigen::Matrix<double, 15, 1>;
  Vector stacked() const;
  static ErrorState from_stacked(const Vector& x);
  bool finite() const { return stacked().allFinite(); }
};

struct StrapdownState {
  Dcm d_nb;  // navigation -> body
  Vec3 v = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  double t = 0.0;
  Vec3 b_hat = Vec3::Zero();  // accel bias estimate [m/s^2]
  Vec3 d_hat = Vec3::Zero();  // gyro bias estimate [rad/s]
  long steps = 0;

  Pose pose() const { return {p, d2e(d_nb)}; }
};

inline constexpr int kReorthonormalizeEvery = 100;

StrapdownState ins_init(const Pose& ic_pose, const Vec3& ic_v, double t0 = 0.0);

/// One Euler-integration step with bias-compensated increments:
///   D_n^b[k] = F(q_t) D_n^b[k-1]
///   v[k]     = v[k-1] + D_b^n[k] q_v + (0, 0, g dt)
///   p[k]     = p[k-1] + v[k] dt
/// The attitude is re-orthonormalized every kReorthonormalizeEvery steps.
StrapdownState strapdown_step(const StrapdownState& s, const ImuIncrements& inc,
                              double g = kStandardGravity);

/// Closed-loop feedback of an estimated error state. The caller resets the
/// filter's error state to zero afterwards.
StrapdownState apply_correction(const StrapdownState& s, const ErrorState& dx);

}  // namespace gradesim
