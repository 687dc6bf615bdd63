#include "gradesim/eskf.hpp"

#include "gradesim/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gradesim {

namespace {
const Mat3 I3 = Mat3::Identity();
}

Mat15 build_system_matrix(const Mat3& sigma_D, const Mat3& A_s, double dt_m,
                          bool couple_position_into_velocity) {
  if (!(dt_m > 0.0)) throw std::invalid_argument("build_system_matrix: dt_m <= 0");
  Mat15 A = Mat15::Zero();
  // row 1: position error
  A.block<3, 3>(0, 0) = I3;
  A.block<3, 3>(0, 6) = I3 * dt_m;
  // row 2: attitude error
  A.block<3, 3>(3, 3) = I3;
  A.block<3, 3>(3, 12) = -sigma_D;
  // row 3: velocity error
  if (couple_position_into_velocity) A.block<3, 3>(6, 0) = I3 / dt_m;
  A.block<3, 3>(6, 3) = A_s;
  A.block<3, 3>(6, 6) = I3;
  A.block<3, 3>(6, 9) = sigma_D;
  // rows 4-5: constant biases
  A.block<3, 3>(9, 9) = I3;
  A.block<3, 3>(12, 12) = I3;
  return A;
}

Mat6x15 measurement_matrix() {
  Mat6x15 H = Mat6x15::Zero();
  H.block<3, 3>(0, 0) = -I3;
  H.block<3, 3>(3, 3) = -I3;
  return H;
}

MeasurementResidual compute_residual(const Pose& aiding, const StrapdownState& ins) {
  MeasurementResidual r;
  r.dz.head<3>() = aiding.p - ins.p;
  r.dz.tail<3>() = d2e(e2d(aiding.att).transpose() * ins.d_nb).vec();
  return r;
}

std::pair<ErrorState, FilterModel> predict(const FilterModel& model, const ErrorState& x) {
  FilterModel m = model;
  const Vec15 xs = model.A * x.stacked();
  m.P = model.A * model.P * model.A.transpose() + model.Q;
  m.P = 0.5 * (m.P + m.P.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat15> eig(m.P, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-6) {
    throw NumericalDivergence("predict: covariance lost positive semidefiniteness");
  }
  return {ErrorState::from_stacked(xs), m};
}

KalmanUpdate kalman_update(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                           const Eigen::MatrixXd& R, const Eigen::VectorXd& dz) {
  const Eigen::MatrixXd S = H * P * H.transpose() + R;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    throw SingularInnovation("update: innovation covariance ill-conditioned");
  }
  KalmanUpdate out;
  // K = P H^T S^-1, via S^-1 (H P) since S and P are symmetric.
  out.K = S.ldlt().solve(H * P).transpose();
  out.dx = out.K * dz;
  const Eigen::MatrixXd IKH =
      Eigen::MatrixXd::Identity(P.rows(), P.cols()) - out.K * H;
  out.P = IKH * P * IKH.transpose() + out.K * R * out.K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

std::pair<ErrorState, FilterModel> update(const FilterModel& model,
                                          const MeasurementResidual& dz) {
  const KalmanUpdate ku = kalman_update(model.P, model.H, model.R, dz.dz);
  FilterModel m = model;
  m.P = ku.P;
  return {ErrorState::from_stacked(ku.dx), m};
}

FilterTuning FilterTuning::matched(const NoiseConfig& noise) {
  FilterTuning t;
  t.r_pos = noise.dp_err;
  t.r_att = noise.dpsi_err;
  t.p0_pos = noise.dp_ic.cwiseAbs();
  t.p0_att = noise.dpsi_ic.cwiseAbs();
  t.p0_vel = noise.dv_ic.cwiseAbs();
  t.p0_accel_bias = noise.b_c.cwiseAbs();
  t.p0_gyro_bias = noise.d_c.cwiseAbs();
  t.accel_rw = noise.a_rw;
  t.gyro_rw = noise.g_rw;
  return t;
}

Mat6 FilterTuning::R() const {
  Vec6 sd;
  sd << r_pos, r_att;
  sd = sd.cwiseMax(r_floor);
  return sd.cwiseProduct(sd).asDiagonal();
}

Mat15 FilterTuning::P0() const {
  Vec15 sd;
  sd << p0_pos, p0_att, p0_vel, p0_accel_bias, p0_gyro_bias;
  return sd.cwiseProduct(sd).asDiagonal();
}

Mat15 FilterTuning::Q(double dt_m) const {
  Mat15 q = Mat15::Zero();
  const Vec3 a2 = accel_rw.cwiseProduct(accel_rw);
  const Vec3 g2 = gyro_rw.cwiseProduct(gyro_rw);
  for (int a = 0; a < 3; ++a) {
    q(a, a) = a2[a] * dt_m * dt_m * dt_m / 3.0 + q_pos * dt_m;
    q(3 + a, 3 + a) = g2[a] * dt_m + q_att * dt_m;
    q(6 + a, 6 + a) = a2[a] * dt_m + q_vel * dt_m;
    q(9 + a, 9 + a) = q_bias;
    q(12 + a, 12 + a) = q_bias;
  }
  // velocity noise integrates into position
  for (int a = 0; a < 3; ++a) {
    q(a, 6 + a) = q(6 + a, a) = a2[a] * dt_m * dt_m / 2.0;
  }
  return q;
}

FusionFilter::FusionFilter(const StrapdownState& initial, const FilterTuning& tuning)
    : ins_(initial), tuning_(tuning), last_aid_t_(initial.t), last_aid_v_(initial.v) {
  model_.P = tuning_.P0();
  model_.H = measurement_matrix();
  model_.R = tuning_.R();
}

void FusionFilter::propagate(const ImuIncrements& inc) {
  ins_ = strapdown_step(ins_, inc, tuning_.options.g);
  sigma_D_ += ins_.d_nb.m.transpose() * inc.dt;
}

UpdateReport FusionFilter::aid(const Pose& measurement) {
  const double dt_m = ins_.t - last_aid_t_;
  if (!(dt_m > 0.0)) throw StreamMisaligned("aid: measurement not after previous epoch");

  Vec3 dv = ins_.v - last_aid_v_;
  if (tuning_.options.gravity_in_velocity_skew) dv.z() -= tuning_.options.g * dt_m;

  model_.dt_m = dt_m;
  model_.sigma_D = sigma_D_;
  model_.A_s = skew(dv);
  model_.A = build_system_matrix(sigma_D_, model_.A_s, dt_m,
                                 tuning_.options.couple_position_into_velocity);
  model_.Q = tuning_.Q(dt_m);

  UpdateReport rep;
  rep.t = ins_.t;
  auto [x_prior, m_prior] = predict(model_, ErrorState{});
  rep.P_prior = m_prior.P;
  rep.dz = compute_residual(measurement, ins_);

  const KalmanUpdate ku = kalman_update(m_prior.P, m_prior.H, m_prior.R, rep.dz.dz);
  rep.dx = ErrorState::from_stacked(ku.dx);
  rep.P = ku.P;
  rep.hk = m_prior.H * ku.K;
  model_ = m_prior;
  model_.P = ku.P;

  ins_ = apply_correction(ins_, rep.dx);
  // error state is implicitly reset: it is never carried between epochs
  sigma_D_.setZero();
  last_aid_t_ = ins_.t;
  last_aid_v_ = ins_.v;
  return rep;
}

FusionResult fuse_rollout(const std::vector<ImuIncrements>& imu,
                          const std::vector<AidingMeasurement>& aiding,
                          const StrapdownState& ic, const FilterTuning& tuning) {
  for (std::size_t j = 1; j < aiding.size(); ++j) {
    if (!(aiding[j].t > aiding[j - 1].t)) {
      throw StreamMisaligned("fuse_rollout: aiding timestamps not increasing at " +
                             std::to_string(j));
    }
  }
  FusionFilter filter(ic, tuning);
  FusionResult out;
  out.estimates.reserve(imu.size());
  std::size_t next = 0;
  for (const auto& inc : imu) {
    filter.propagate(inc);
    const double t = filter.ins().t;
    const double tol = 0.5 * inc.dt;
    if (next < aiding.size()) {
      if (aiding[next].t < t - tol) {
        throw StreamMisaligned("fuse_rollout: aiding at t=" + std::to_string(aiding[next].t) +
                               " does not match any increment");
      }
      if (std::abs(aiding[next].t - t) <= tol) {
        auto rep = filter.aid(aiding[next].pose);
        out.covariances.push_back({t, rep.P});
        out.updates.push_back(std::move(rep));
        ++next;
      }
    }
    out.estimates.push_back({t, filter.pose()});
  }
  if (next < aiding.size()) {
    throw StreamMisaligned("fuse_rollout: aiding at t=" + std::to_string(aiding[next].t) +
                           " is past the last increment");
  }
  return out;
}

void write_covariance_csv(const std::filesystem::path& path,
                          const std::vector<CovarianceSnapshot>& snaps) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (const auto& s : snaps) {
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    f << buf;
    for (int r = 0; r < 15; ++r) {
      for (int c = 0; c < 15; ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", s.P(r, c));
        f << buf;
      }
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<CovarianceSnapshot> read_covariance_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<CovarianceSnapshot> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    CovarianceSnapshot s;
    std::getline(ss, cell, ',');
    s.t = std::stod(cell);
    for (int k = 0; k < 225; ++k) {
      if (!std::getline(ss, cell, ',')) throw IoError("short covariance row in " + path.string());
      s.P(k / 15, k % 15) = std::stod(cell);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace gradesim
