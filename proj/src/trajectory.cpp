#include "gradesim/trajectory.hpp"

#include "gradesim/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gradesim {

std::vector<TrajectorySample> generate_leg_trajectory(const Pose& start, const Pose& end,
                                                      double speed, double rate_hz,
                                                      const LegOptions& opts) {
  if (!(rate_hz >= 1.0)) throw std::invalid_argument("generate_leg_trajectory: rate < 1 Hz");
  if (!(speed > 0.0)) throw std::invalid_argument("generate_leg_trajectory: speed <= 0");

  const Vec3 delta = end.p - start.p;
  const double distance = delta.norm();
  const UnitQuaternion q1 = quat_from_euler(start.att);
  const UnitQuaternion q2 = quat_from_euler(end.att);
  const UnitQuaternion rel = canonical(normalized(hamilton(q1.conjugate(), q2)));
  const double angle = 2.0 * std::atan2(rel.i.norm(), rel.r);

  if (distance < opts.min_distance && angle < 1e-12) {
    throw DegenerateLeg("generate_leg_trajectory: start and end coincide");
  }

  const double duration = std::max(distance / speed, angle / opts.turn_rate);
  const long n = std::max(1L, std::lround(duration * rate_hz));
  const auto atts = interpolate_attitude(q1, q2, static_cast<int>(n) + 1, opts.attitude_mode);
  const Vec3 v = delta * (rate_hz / static_cast<double>(n));

  std::vector<TrajectorySample> out;
  out.reserve(n);
  for (long k = 0; k < n; ++k) {
    TrajectorySample s;
    s.t = opts.t0 + static_cast<double>(k) / rate_hz;
    s.pose.p = start.p + delta * (static_cast<double>(k) / static_cast<double>(n));
    s.pose.att = k == 0 ? start.att : quat_to_euler(atts[k]);
    s.v = v;
    out.push_back(s);
  }
  return out;
}

std::vector<TrajectorySample> generate_path_trajectory(const std::vector<Pose>& waypoints,
                                                       double speed, double rate_hz,
                                                       const LegOptions& opts) {
  if (waypoints.size() < 2) throw std::invalid_argument("generate_path_trajectory: < 2 waypoints");
  std::vector<TrajectorySample> out;
  long index = 0;
  for (std::size_t w = 0; w + 1 < waypoints.size(); ++w) {
    LegOptions leg_opts = opts;
    leg_opts.t0 = 0.0;
    auto leg = generate_leg_trajectory(waypoints[w], waypoints[w + 1], speed, rate_hz, leg_opts);
    for (auto& s : leg) {
      // Times come from a global index so the interval stays uniform across legs.
      s.t = opts.t0 + static_cast<double>(index++) / rate_hz;
      out.push_back(s);
    }
  }
  TrajectorySample last;
  last.t = opts.t0 + static_cast<double>(index) / rate_hz;
  last.pose = waypoints.back();
  last.v = out.back().v;
  out.push_back(last);
  return out;
}

ImuSynthesizer::ImuSynthesizer(const TrajectorySample& first, double g)
    : prev_p_(first.pose.p),
      prev_v_(first.v),
      prev_d_nb_(e2d(first.pose.att)),
      prev_t_(first.t),
      g_(g) {}

ImuIncrements ImuSynthesizer::push(const TrajectorySample& next) {
  const double dt = next.t - prev_t_;
  if (!(dt > 0.0)) throw NonUniformSampling("ImuSynthesizer: time not increasing");

  const Vec3 v = (next.pose.p - prev_p_) * (1.0 / dt);
  const Dcm d_nb = e2d(next.pose.att);

  ImuIncrements inc;
  inc.dt = dt;
  inc.q_t = d2e(d_nb * prev_d_nb_.transpose()).vec();
  const Vec3 dv_body = d_nb * (v - prev_v_);
  inc.q_v = dv_body - d_nb * Vec3(0.0, 0.0, g_ * dt);

  prev_p_ = next.pose.p;
  prev_v_ = v;
  prev_d_nb_ = d_nb;
  prev_t_ = next.t;
  return inc;
}

std::vector<ImuIncrements> generate_imu_increments(const std::vector<TrajectorySample>& traj,
                                                   double g) {
  if (traj.size() < 2) throw std::invalid_argument("generate_imu_increments: < 2 samples");
  const double dt0 = traj[1].t - traj[0].t;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (std::abs((traj[k].t - traj[k - 1].t) - dt0) > 1e-9) {
      throw NonUniformSampling("generate_imu_increments: interval varies at sample " +
                               std::to_string(k));
    }
  }
  ImuSynthesizer synth(traj.front(), g);
  std::vector<ImuIncrements> out;
  out.reserve(traj.size() - 1);
  for (std::size_t k = 1; k < traj.size(); ++k) out.push_back(synth.push(traj[k]));
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectorySample>& traj) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "t,x,y,z,psi,theta,phi,vx,vy,vz\n";
  char buf[512];
  for (const auto& s : traj) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  s.pose.p.x(), s.pose.p.y(), s.pose.p.z(), s.pose.att.psi, s.pose.att.theta,
                  s.pose.att.phi, s.v.x(), s.v.y(), s.v.z());
    f << buf;
  }
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<TrajectorySample> read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(f, line);  // header
  std::vector<TrajectorySample> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    double c[10];
    std::istringstream ss(line);
    for (double& x : c) {
      std::string cell;
      std::getline(ss, cell, ',');
      x = std::stod(cell);
    }
    TrajectorySample s;
    s.t = c[0];
    s.pose.p = Vec3(c[1], c[2], c[3]);
    s.pose.att = {c[4], c[5], c[6]};
    s.v = Vec3(c[7], c[8], c[9]);
    out.push_back(s);
  }
  return out;
}

}  // namespace gradesim
