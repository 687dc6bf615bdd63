#pragma once

// Attitude and pose mathematics shared by every module.
//
// Conventions:
//  * Navigation frame is NED (x forward/north, y right/east, z down).
//  * Euler angles are yaw-pitch-roll (psi, theta, phi), Z-Y-X intrinsic.
//  * e2d() returns the navigation-to-body DCM D_n^b; its transpose is D_b^n.
//  * Whenever an attitude triple is stacked into a 3-vector it is ordered
//    (phi, theta, psi), i.e. about the x, y and z axes. For small angles
//    e2d(v) ~= I - skew(v).
//  * Quaternions are Hamilton, scalar first, and represent the body-to-nav
//    rotation; they are canonicalized to r >= 0.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace gradesim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

Mat3 skew(const Vec3& v);

struct EulerAngles {
  double psi = 0.0;    // yaw [rad]
  double theta = 0.0;  // pitch [rad]
  double phi = 0.0;    // roll [rad]

  /// Stacked (phi, theta, psi).
  Vec3 vec() const { return {phi, theta, psi}; }
  static EulerAngles from_vec(const Vec3& v) { return {v.z(), v.y(), v.x()}; }

  bool finite() const {
    return std::isfinite(psi) && std::isfinite(theta) && std::isfinite(phi);
  }
};

/// Direction-cosine matrix. Holds whatever rotation the caller puts in; the
/// name of the variable says which direction (d_nb, d_bn).
struct Dcm {
  Mat3 m = Mat3::Identity();

  static Dcm identity() { return {}; }
  Dcm transpose() const { return {m.transpose()}; }
  Dcm operator*(const Dcm& o) const { return {m * o.m}; }
  Vec3 operator*(const Vec3& v) const { return m * v; }

  /// max |M^T M - I|, the orthonormality defect.
  double orthonormality_error() const;
  /// Symmetric orthogonalization M (M^T M)^(-1/2), computed through the SVD.
  Dcm reorthonormalized() const;
};

struct UnitQuaternion {
  double r = 1.0;
  Vec3 i = Vec3::Zero();

  static UnitQuaternion identity() { return {}; }
  double norm() const { return std::sqrt(r * r + i.squaredNorm()); }
  UnitQuaternion conjugate() const { return {r, -i}; }
};

struct Pose {
  Vec3 p = Vec3::Zero();
  EulerAngles att;

  bool finite() const { return p.allFinite() && att.finite(); }
};

/// Euler angles to navigation-to-body DCM.
Dcm e2d(const EulerAngles& a);
/// Same, taking the stacked (phi, theta, psi) form used for increments and errors.
inline Dcm e2d(const Vec3& v) { return e2d(EulerAngles::from_vec(v)); }

/// DCM to Euler angles; throws GimbalLock when |D(0,2)| >= 1 - 1e-9.
EulerAngles d2e(const Dcm& d);

/// Raw Hamilton product (no normalization).
UnitQuaternion hamilton(const UnitQuaternion& a, const UnitQuaternion& b);
UnitQuaternion normalized(const UnitQuaternion& q);
UnitQuaternion canonical(const UnitQuaternion& q);

/// Hamilton product, renormalized and canonicalized.
UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b);

UnitQuaternion quat_from_euler(const EulerAngles& a);
/// Body-to-navigation rotation matrix of q, i.e. e2d(...)^T.
Dcm quat_to_body_to_nav(const UnitQuaternion& q);
EulerAngles quat_to_euler(const UnitQuaternion& q);

enum class InterpolationMode {
  // Increment built from q1 (x) q2 and the imaginary part scaled by k.
  kLiteral,
  // Relative rotation conj(q1) (x) q2, split into equal angle fractions so
  // that the last element equals q2.
  kRelative,
};

/// Attitude interpolation producing n_int quaternions starting at q1.
/// Throws DegenerateRotation when the composed quaternion cannot be normalized.
std::vector<UnitQuaternion> interpolate_attitude(
    const UnitQuaternion& q1, const UnitQuaternion& q2, int n_int,
    InterpolationMode mode = InterpolationMode::kLiteral);

}  // namespace gradesim
