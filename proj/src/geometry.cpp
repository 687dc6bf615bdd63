#include "gradesim/geometry.hpp"

#include "gradesim/errors.hpp"

#include <stdexcept>

namespace gradesim {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

double Dcm::orthonormality_error() const {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Dcm Dcm::reorthonormalized() const {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU() * svd.matrixV().transpose()};
}

Dcm e2d(const EulerAngles& a) {
  const double cps = std::cos(a.psi), sps = std::sin(a.psi);
  const double cth = std::cos(a.theta), sth = std::sin(a.theta);
  const double cph = std::cos(a.phi), sph = std::sin(a.phi);
  Dcm d;
  d.m << cth * cps, cth * sps, -sth,
         sph * sth * cps - cph * sps, sph * sth * sps + cph * cps, sph * cth,
         cph * sth * cps + sph * sps, cph * sth * sps - sph * cps, cph * cth;
  return d;
}

EulerAngles d2e(const Dcm& d) {
  const double s = d.m(0, 2);
  if (!(std::abs(s) < 1.0 - 1e-9)) {
    throw GimbalLock("d2e: pitch at +-90 deg (|D(0,2)| = " + std::to_string(s) + ")");
  }
  EulerAngles a;
  a.theta = -std::asin(s);
  a.psi = wrap_angle(std::atan2(d.m(0, 1), d.m(0, 0)));
  a.phi = wrap_angle(std::atan2(d.m(1, 2), d.m(2, 2)));
  return a;
}

UnitQuaternion hamilton(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.r * b.r - a.i.dot(b.i), a.r * b.i + b.r * a.i + a.i.cross(b.i)};
}

UnitQuaternion normalized(const UnitQuaternion& q) {
  const double n = q.norm();
  return {q.r / n, q.i / n};
}

UnitQuaternion canonical(const UnitQuaternion& q) {
  if (q.r < 0.0) return {-q.r, -q.i};
  return q;
}

UnitQuaternion quat_mul(const UnitQuaternion& a, const UnitQuaternion& b) {
  return canonical(normalized(hamilton(a, b)));
}

UnitQuaternion quat_from_euler(const EulerAngles& a) {
  const double cy = std::cos(0.5 * a.psi), sy = std::sin(0.5 * a.psi);
  const double cp = std::cos(0.5 * a.theta), sp = std::sin(0.5 * a.theta);
  const double cr = std::cos(0.5 * a.phi), sr = std::sin(0.5 * a.phi);
  UnitQuaternion q;
  q.r = cr * cp * cy + sr * sp * sy;
  q.i = Vec3(sr * cp * cy - cr * sp * sy,
             cr * sp * cy + sr * cp * sy,
             cr * cp * sy - sr * sp * cy);
  return canonical(normalized(q));
}

Dcm quat_to_body_to_nav(const UnitQuaternion& q) {
  const double w = q.r, x = q.i.x(), y = q.i.y(), z = q.i.z();
  Dcm d;
  d.m << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
         2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
         2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return d;
}

EulerAngles quat_to_euler(const UnitQuaternion& q) {
  return d2e(quat_to_body_to_nav(q).transpose());
}

namespace {

std::vector<UnitQuaternion> interpolate_literal(const UnitQuaternion& q1,
                                                const UnitQuaternion& q2, int n_int) {
  const UnitQuaternion prod = hamilton(q1, q2);
  const double n = prod.norm();
  if (n < 1e-12) throw DegenerateRotation("interpolate_attitude: |q1 (x) q2| < 1e-12");
  const double scale = 1.0 / (n * n_int);
  const UnitQuaternion inc{prod.r * scale, prod.i * scale};

  std::vector<UnitQuaternion> out;
  out.reserve(n_int);
  out.push_back(canonical(q1));  // k = 0 is the identity increment
  for (int k = 1; k < n_int; ++k) {
    const UnitQuaternion step = normalized({inc.r, static_cast<double>(k) * inc.i});
    out.push_back(canonical(normalized(hamilton(q1, step))));
  }
  return out;
}

std::vector<UnitQuaternion> interpolate_relative(const UnitQuaternion& q1,
                                                 const UnitQuaternion& q2, int n_int) {
  const UnitQuaternion rel_raw = hamilton(q1.conjugate(), q2);
  if (rel_raw.norm() < 1e-12) {
    throw DegenerateRotation("interpolate_attitude: |conj(q1) (x) q2| < 1e-12");
  }
  const UnitQuaternion rel = canonical(normalized(rel_raw));
  const double s = rel.i.norm();
  const double angle = 2.0 * std::atan2(s, rel.r);
  const Vec3 axis = s > 0.0 ? Vec3(rel.i / s) : Vec3::UnitZ();

  std::vector<UnitQuaternion> out;
  out.reserve(n_int);
  out.push_back(canonical(q1));
  for (int k = 1; k < n_int; ++k) {
    const double half = 0.5 * angle * static_cast<double>(k) / (n_int - 1);
    const UnitQuaternion step{std::cos(half), std::sin(half) * axis};
    out.push_back(canonical(normalized(hamilton(q1, step))));
  }
  return out;
}

}  // namespace

std::vector<UnitQuaternion> interpolate_attitude(const UnitQuaternion& q1,
                                                 const UnitQuaternion& q2, int n_int,
                                                 InterpolationMode mode) {
  if (n_int < 2) throw std::invalid_argument("interpolate_attitude: n_int must be >= 2");
  return mode == InterpolationMode::kLiteral ? interpolate_literal(q1, q2, n_int)
                                             : interpolate_relative(q1, q2, n_int);
}

}  // namespace gradesim
