#include "doctest.h"
#include "test_helpers.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/trajectory.hpp"

using namespace gradesim;

namespace {
Pose pose(double x, double y, double psi) {
  Pose p;
  p.p = Vec3(x, y, 0.0);
  p.att.psi = psi;
  return p;
}
}  // namespace

TEST_CASE("straight leg: sample count, spacing and velocity") {
  const auto traj = generate_leg_trajectory(pose(0, 0, 0), pose(1.0, 0.5, 0), 0.5, 100.0);
  const double dist = std::sqrt(1.25);
  REQUIRE(traj.size() == static_cast<std::size_t>(std::lround(dist / 0.5 * 100.0)));
  CHECK(traj.front().pose.p.isZero());
  for (std::size_t k = 1; k < traj.size(); ++k) {
    CHECK(traj[k].t - traj[k - 1].t == doctest::Approx(0.01));
    CHECK((traj[k].pose.p - traj[k - 1].pose.p).norm() == doctest::Approx(dist / traj.size()));
  }
  CHECK(traj.front().v.norm() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("rotation-only leg runs at the turn rate") {
  const auto traj = generate_leg_trajectory(pose(1, 1, 0), pose(1, 1, kPi / 2), 0.5, 100.0);
  CHECK(traj.size() == 100);  // 90 deg at 90 deg/s
  for (const auto& s : traj) CHECK(s.pose.p == Vec3(1, 1, 0));
  CHECK(traj[50].pose.att.psi == doctest::Approx(kPi / 4));
}

TEST_CASE("degenerate and invalid legs") {
  CHECK_THROWS_AS(generate_leg_trajectory(pose(1, 1, 0.2), pose(1, 1, 0.2), 0.5, 100.0),
                  DegenerateLeg);
  CHECK_THROWS_AS(generate_leg_trajectory(pose(0, 0, 0), pose(1, 0, 0), 0.0, 100.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_leg_trajectory(pose(0, 0, 0), pose(1, 0, 0), 0.5, 0.5),
                  std::invalid_argument);
}

TEST_CASE("path ends on its last waypoint with uniform time") {
  const std::vector<Pose> wps{pose(0, 0, 0), pose(1, 0, 0), pose(1, 0, kPi / 2), pose(1, 1, kPi / 2)};
  const auto traj = generate_path_trajectory(wps, 0.5, 100.0);
  CHECK(traj.back().pose.p == wps.back().p);
  CHECK(traj.back().pose.att.psi == wps.back().att.psi);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    CHECK(traj[k].t - traj[k - 1].t == doctest::Approx(0.01).epsilon(1e-9));
  }
}

TEST_CASE("increments of a stationary, level body measure gravity") {
  std::vector<TrajectorySample> traj(3);
  for (int k = 0; k < 3; ++k) traj[k].t = 0.01 * k;
  const auto inc = generate_imu_increments(traj);
  REQUIRE(inc.size() == 2);
  for (const auto& i : inc) {
    CHECK(i.q_t.isZero());
    CHECK(i.q_v.x() == 0.0);
    CHECK(i.q_v.z() == doctest::Approx(-kStandardGravity * 0.01));
  }
}

TEST_CASE("increments reject irregular sampling") {
  std::vector<TrajectorySample> traj(3);
  traj[1].t = 0.01;
  traj[2].t = 0.03;
  CHECK_THROWS_AS(generate_imu_increments(traj), NonUniformSampling);
  traj[2].t = 0.01;
  CHECK_THROWS_AS(generate_imu_increments(traj), NonUniformSampling);
}

TEST_CASE("yaw increment of a constant-rate turn") {
  const auto traj = generate_leg_trajectory(pose(0, 0, 0), pose(0, 0, 1.0), 0.5, 100.0);
  const auto inc = generate_imu_increments(traj);
  const double step = traj[1].pose.att.psi - traj[0].pose.att.psi;
  for (const auto& i : inc) CHECK(i.q_t.z() == doctest::Approx(step).epsilon(1e-9));
}

TEST_CASE("trajectory CSV round trip is exact") {
  const auto traj =
      generate_path_trajectory({pose(0, 0, 0.1), pose(0.3, 0.7, 1.1), pose(0.9, 0.2, -0.4)}, 0.3, 100.0);
  const auto dir = testutil::scratch_dir("trajectory");
  write_trajectory_csv(dir / "t.csv", traj);
  const auto back = read_trajectory_csv(dir / "t.csv");
  REQUIRE(back.size() == traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(back[k].t == traj[k].t);
    CHECK(back[k].pose.p == traj[k].pose.p);
    CHECK(back[k].pose.att.psi == traj[k].pose.att.psi);
    CHECK(back[k].v == traj[k].v);
  }
}
