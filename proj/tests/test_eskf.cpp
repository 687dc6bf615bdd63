#include "doctest.h"
#include "test_helpers.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/eskf.hpp"

using namespace gradesim;

// Reference numbers from tests/oracles/eskf_oracle.py.

namespace {
Pose pose(double x, double y, double psi) {
  Pose p;
  p.p = Vec3(x, y, 0.0);
  p.att.psi = psi;
  return p;
}

struct Streams {
  std::vector<TrajectorySample> traj;
  std::vector<ImuIncrements> imu;
  std::vector<AidingMeasurement> aiding;
};

Streams make_streams(const NoiseConfig& noise, std::uint64_t seed) {
  Streams s;
  s.traj = generate_path_trajectory(
      {pose(0.2, 0.2, 0), pose(1.6, 0.2, 0), pose(1.6, 0.2, kPi / 2), pose(1.6, 1.4, kPi / 2)}, 0.3,
      100.0);
  RolloutRng rng(seed);
  for (const auto& inc : generate_imu_increments(s.traj)) {
    s.imu.push_back(corrupt_imu(inc, noise, rng.imu()));
  }
  for (std::size_t k = 100; k < s.traj.size(); k += 100) {
    s.aiding.push_back({s.traj[k].t, corrupt_aiding(s.traj[k].pose, noise, rng.aiding())});
  }
  return s;
}
}  // namespace

TEST_CASE("scalar Kalman update") {
  const auto u = kalman_update(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                               Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, 2.0));
  CHECK(u.K(0, 0) == doctest::Approx(0.5));
  CHECK(u.P(0, 0) == doctest::Approx(0.5));
  CHECK(u.dx[0] == doctest::Approx(1.0));
}

TEST_CASE("Joseph update matches the textbook posterior") {
  Eigen::MatrixXd P(3, 3), H(2, 3), R = Eigen::Vector2d(0.4, 0.25).asDiagonal();
  P << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.8;
  H << 1.0, 0.0, 0.5, 0.0, -1.0, 0.0;
  const Eigen::Vector2d dz(0.7, -0.3);
  const auto u = kalman_update(P, H, R, dz);
  const Eigen::Vector3d dx_ref(0.5526680896478121, 0.26424759871931697, 0.09573105656350052);
  Eigen::Matrix3d P_ref;
  P_ref << 0.43086979722518687, 0.02134471718249733, -0.2593916755602988,
           0.02134471718249734, 0.21398078975453563, -0.03415154749199571,
           -0.25939167556029885, -0.03415154749199573, 0.6750266808964781;
  CHECK(testutil::max_abs_diff(u.dx, dx_ref) < 1e-14);
  CHECK(testutil::max_abs_diff(u.P, P_ref) < 1e-14);
  CHECK(testutil::max_abs_diff(u.P, u.P.transpose()) == 0.0);
}

TEST_CASE("singular innovation is rejected") {
  FilterModel m;
  m.H = measurement_matrix();
  m.R = Mat6::Zero();
  m.P = Mat15::Zero();
  MeasurementResidual dz;
  CHECK_THROWS_AS(update(m, dz), SingularInnovation);
}

TEST_CASE("an indefinite covariance is reported as divergence") {
  FilterModel m;
  m.P = Mat15::Identity();
  m.P(4, 4) = -1.0;
  m.A = Mat15::Identity();
  CHECK_THROWS_AS(predict(m, ErrorState{}), NumericalDivergence);
}

TEST_CASE("system matrix layout") {
  Mat3 sd = Mat3::Identity() * 0.7;
  sd(0, 1) = 0.2;
  const Mat3 as = skew(Vec3(0.1, -0.2, 0.3));
  const Mat15 A = build_system_matrix(sd, as, 2.0);
  CHECK(A.block<3, 3>(0, 6) == Mat3::Identity() * 2.0);
  CHECK(A.block<3, 3>(3, 12) == -sd);
  CHECK(A.block<3, 3>(6, 0) == Mat3::Identity() * 0.5);
  CHECK(A.block<3, 3>(6, 3) == as);
  CHECK(A.block<3, 3>(6, 9) == sd);
  CHECK(A.block<6, 6>(9, 9) == Eigen::Matrix<double, 6, 6>::Identity());
  CHECK(A.diagonal() == Vec15::Ones());
  CHECK(A.block<3, 3>(0, 3).isZero(0));
  const Mat15 A2 = build_system_matrix(sd, as, 2.0, false);
  CHECK(A2.block<3, 3>(6, 0).isZero(0));
}

TEST_CASE("measurement matrix selects position and attitude with a minus sign") {
  const Mat6x15 H = measurement_matrix();
  CHECK(H.block<3, 3>(0, 0) == -Mat3::Identity());
  CHECK(H.block<3, 3>(3, 3) == -Mat3::Identity());
  CHECK(H.cwiseAbs().sum() == 6.0);
}

TEST_CASE("residual of a yaw-only difference") {
  StrapdownState ins = ins_init(pose(1.0, 1.0, 0.1), Vec3::Zero());
  const auto r = compute_residual(pose(1.0, 1.0, 0.0), ins);
  // attitude residual is the INS rotation seen from the aiding frame
  CHECK(r.dz[5] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.dz.head<5>().cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("residual of a general attitude difference") {
  Pose aid, est;
  aid.p = Vec3(1.0, 2.0, 0.1);
  aid.att = {0.4, 0.05, -0.03};
  est.p = Vec3(0.9, 2.2, 0.0);
  est.att = {0.35, 0.02, 0.01};
  const StrapdownState ins = ins_init(est, Vec3::Zero());
  const auto r = compute_residual(aid, ins);
  CHECK(r.dz[0] == doctest::Approx(0.1));
  CHECK(r.dz[1] == doctest::Approx(-0.2));
  CHECK(r.dz[3] == doctest::Approx(0.04851301378094992).epsilon(1e-12));
  CHECK(r.dz[4] == doctest::Approx(-0.01202169416162646).epsilon(1e-12));
  CHECK(r.dz[5] == doctest::Approx(-0.05169172314002826).epsilon(1e-12));
}

TEST_CASE("a position residual pulls the estimate toward the aiding") {
  // The update's dx is estimate minus truth, so an aiding fix ahead of the
  // INS gives a negative dp, and feedback (p -= dp) moves the INS forward.
  FilterModel m;
  m.H = measurement_matrix();
  m.R = Mat6::Identity() * 1e-4;
  m.P = Mat15::Identity() * 1e-2;
  MeasurementResidual dz;
  dz.dz[0] = 0.1;
  const auto [dx, post] = update(m, dz);
  CHECK(dx.dp.x() < -0.09);
  CHECK(post.P(0, 0) < m.P(0, 0));
}

TEST_CASE("process noise over one aiding interval") {
  FilterTuning t;
  t.accel_rw = Vec3::Constant(0.005);
  t.gyro_rw = Vec3::Constant(0.0008726646259971648);
  t.q_pos = 1e-6;
  t.q_vel = 2e-5;
  t.q_att = 3e-7;
  const Mat15 Q = t.Q(1.0);
  CHECK(Q(0, 0) == doctest::Approx(9.333333333333334e-06).epsilon(1e-14));
  CHECK(Q(0, 6) == doctest::Approx(1.25e-05).epsilon(1e-14));
  CHECK(Q(6, 0) == Q(0, 6));
  CHECK(Q(6, 6) == doctest::Approx(4.5e-05).epsilon(1e-14));
  CHECK(Q(3, 3) == doctest::Approx(1.0615435494667715e-06).epsilon(1e-14));
  CHECK(Q(9, 9) == t.q_bias);
}

TEST_CASE("R has a floor so a perfect sensor stays invertible") {
  FilterTuning t;
  t.r_pos = Vec3(0.05, 0.0, 0.05);
  const Mat6 R = t.R();
  CHECK(R(0, 0) == doctest::Approx(0.0025));
  CHECK(R(1, 1) == doctest::Approx(1e-10));
}

TEST_CASE("noise-free streams are reproduced exactly") {
  const Streams s = make_streams(NoiseConfig{}, 1);
  const auto ic = ins_init(s.traj.front().pose, s.traj.front().v, s.traj.front().t);
  const auto res = fuse_rollout(s.imu, s.aiding, ic, FilterTuning::matched(NoiseConfig{}));
  REQUIRE(res.estimates.size() == s.imu.size());
  CHECK(res.updates.size() == s.aiding.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < res.estimates.size(); ++k) {
    worst = std::max(worst, (res.estimates[k].pose.p - s.traj[k + 1].pose.p).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("fusion bounds the drift of a biased, noisy INS") {
  NoiseConfig n;
  n.b_c = Vec3::Constant(0.02);
  n.d_c = Vec3::Constant(0.05 * kDegToRad);
  n.a_rw = Vec3::Constant(0.005);
  n.g_rw = Vec3::Constant(0.05 * kDegToRad);
  n.dp_err = Vec3::Constant(0.05);
  n.dpsi_err = Vec3(1, 1, 5) * kDegToRad;
  const Streams s = make_streams(n, 5);
  const auto ic = ins_init(s.traj.front().pose, s.traj.front().v, s.traj.front().t);

  StrapdownState dr = ic;
  double se_dr = 0.0, se_f = 0.0;
  const auto res = fuse_rollout(s.imu, s.aiding, ic, FilterTuning::matched(n));
  for (std::size_t k = 0; k < s.imu.size(); ++k) {
    dr = strapdown_step(dr, s.imu[k]);
    se_dr += (dr.p - s.traj[k + 1].pose.p).squaredNorm();
    se_f += (res.estimates[k].pose.p - s.traj[k + 1].pose.p).squaredNorm();
  }
  CHECK(std::sqrt(se_f) < 0.5 * std::sqrt(se_dr));
  for (const auto& c : res.covariances) {
    Eigen::SelfAdjointEigenSolver<Mat15> es(c.P);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
  }
}

TEST_CASE("aiding streams must line up with the increments") {
  const Streams s = make_streams(NoiseConfig{}, 1);
  const auto ic = ins_init(s.traj.front().pose, s.traj.front().v, s.traj.front().t);
  auto early = s.aiding;
  early[0].t = s.traj.front().t - 0.5;
  CHECK_THROWS_AS(fuse_rollout(s.imu, early, ic, FilterTuning{}), StreamMisaligned);
  auto late = s.aiding;
  late.push_back({s.traj.back().t + 1.0, s.traj.back().pose});
  CHECK_THROWS_AS(fuse_rollout(s.imu, late, ic, FilterTuning{}), StreamMisaligned);
  auto unordered = s.aiding;
  std::swap(unordered[0], unordered[1]);
  CHECK_THROWS_AS(fuse_rollout(s.imu, unordered, ic, FilterTuning{}), StreamMisaligned);

  FusionFilter f(ic, FilterTuning{});
  CHECK_THROWS_AS(f.aid(s.traj.front().pose), StreamMisaligned);
}

TEST_CASE("covariance snapshot file round trip") {
  std::vector<CovarianceSnapshot> snaps(2);
  snaps[0].t = 1.0;
  snaps[0].P = Mat15::Identity() * (1.0 / 3.0);
  snaps[1].t = 2.0;
  snaps[1].P = Mat15::Random();
  const auto dir = testutil::scratch_dir("cov");
  write_covariance_csv(dir / "p.csv", snaps);
  const auto back = read_covariance_csv(dir / "p.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].P == snaps[0].P);
  CHECK(back[1].P == snaps[1].P);
  CHECK(back[1].t == 2.0);
}
