#pragma once

// Error-state EKF fusing the high-rate strapdown solution with low-rate pose
// aiding. The error state is [dp, dpsi, dv, db_c, dd_c]; see ErrorState for
// the sign of each block.

#include "gradesim/ins.hpp"
#include "gradesim/noise.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <utility>
#include <vector>

namespace gradesim {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat6x15 = Eigen::Matrix<double, 6, 15>;

/// [dp_m, dpsi_m]: position and attitude differences between aiding and INS.
struct MeasurementResidual {
  Vec6 dz = Vec6::Zero();
};

struct FilterModel {
  Mat15 A = Mat15::Identity();
  Mat6x15 H = Mat6x15::Zero();
  Mat15 Q = Mat15::Zero();
  Mat6 R = Mat6::Identity();
  Mat15 P = Mat15::Zero();
  double dt_m = 1.0;
  Mat3 sigma_D = Mat3::Zero();  // sum of D_b^n * dt over the aiding interval [s]
  Mat3 A_s = Mat3::Zero();      // skew of the velocity change over the interval
};

/// Error-state transition over one aiding interval:
///
///   | I        0    I*dt_m  0     0    |
///   | 0        I    0       0    -SD   |
///   | I/dt_m   A_s  I       SD    0    |
///   | 0        0    0       I     0    |
///   | 0        0    0       0     I    |
///
/// `couple_position_into_velocity = false` zeroes the I/dt_m block.
Mat15 build_system_matrix(const Mat3& sigma_D, const Mat3& A_s, double dt_m,
                          bool couple_position_into_velocity = true);

/// Maps the error state to the residual. Both residual blocks measure the
/// aiding pose relative to the INS, the opposite sense of the error state, so
/// H = -[I 0 0 0 0; 0 I 0 0 0].
Mat6x15 measurement_matrix();

/// dp_m = p_aid - p_ins; dpsi_m = h(F(psi_aid)^T F(psi_ins)).
MeasurementResidual compute_residual(const Pose& aiding, const StrapdownState& ins);

/// x <- A x; P <- A P A^T + Q (symmetrized). Throws NumericalDivergence when
/// P acquires an eigenvalue below -1e-6.
std::pair<ErrorState, FilterModel> predict(const FilterModel& model, const ErrorState& x);

/// Joseph-form measurement update. Returns the error-state estimate K dz and
/// the model with the posterior P. Throws SingularInnovation when
/// H P H^T + R has condition number >= 1e12.
std::pair<ErrorState, FilterModel> update(const FilterModel& model,
                                          const MeasurementResidual& dz);

struct KalmanUpdate {
  Eigen::VectorXd dx;
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
};

/// Dimension-agnostic Joseph-form update, shared by the filter and its tests.
KalmanUpdate kalman_update(const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                           const Eigen::MatrixXd& R, const Eigen::VectorXd& dz);

struct FilterOptions {
  bool couple_position_into_velocity = true;
  // Build A_s from the specific-force velocity change (dv - g dt_m e_z). With
  // false, the plain navigation-frame velocity difference is used, which
  // drops the tilt-into-gravity coupling and leaves the filter overconfident.
  bool gravity_in_velocity_skew = true;
  double g = kStandardGravity;
};

/// Noise statistics the filter assumes. SI units, attitude stacked roll/pitch/yaw.
struct FilterTuning {
  Vec3 r_pos = Vec3::Zero();  // aiding position std [m]
  Vec3 r_att = Vec3::Zero();  // aiding attitude std [rad]
  double r_floor = 1e-5;      // lower bound on any R std

  Vec3 p0_pos = Vec3::Zero();
  Vec3 p0_att = Vec3::Zero();
  Vec3 p0_vel = Vec3::Zero();
  Vec3 p0_accel_bias = Vec3::Zero();
  Vec3 p0_gyro_bias = Vec3::Zero();

  Vec3 accel_rw = Vec3::Zero();  // [m/s/sqrt(s)]
  Vec3 gyro_rw = Vec3::Zero();   // [rad/sqrt(s)]
  double q_pos = 0.0;            // extra white position noise [m^2/s]
  double q_vel = 0.0;            // extra velocity noise [m^2/s^3]
  double q_att = 0.0;            // extra attitude noise [rad^2/s]
  double q_bias = 1e-12;         // bias blocks, per interval

  FilterOptions options;

  /// R, P0 and Q taken from the injected noise model (matched filter).
  static FilterTuning matched(const NoiseConfig& noise);

  Mat6 R() const;
  Mat15 P0() const;
  Mat15 Q(double dt_m) const;
};

struct AidingMeasurement {
  double t = 0.0;
  Pose pose;
};

struct UpdateReport {
  double t = 0.0;
  MeasurementResidual dz;
  ErrorState dx;
  Mat15 P_prior = Mat15::Zero();
  Mat15 P = Mat15::Zero();
  Mat6 hk = Mat6::Zero();  // H K; the residual shrinks by (I - H K)
};

/// Incremental INS + ES-EKF: strapdown at every increment, predict/update and
/// feedback whenever an aiding pose arrives.
class FusionFilter {
 public:
  FusionFilter(const StrapdownState& initial, const FilterTuning& tuning);

  void propagate(const ImuIncrements& inc);
  /// Full aiding cycle. Throws StreamMisaligned if the measurement is not
  /// later than the previous one.
  UpdateReport aid(const Pose& measurement);

  const StrapdownState& ins() const { return ins_; }
  const Mat15& covariance() const { return model_.P; }
  const FilterModel& model() const { return model_; }
  const FilterTuning& tuning() const { return tuning_; }
  Pose pose() const { return ins_.pose(); }

 private:
  StrapdownState ins_;
  FilterTuning tuning_;
  FilterModel model_;
  Mat3 sigma_D_ = Mat3::Zero();
  double last_aid_t_;
  Vec3 last_aid_v_;
};

struct PoseEstimate {
  double t = 0.0;
  Pose pose;
};

struct CovarianceSnapshot {
  double t = 0.0;
  Mat15 P = Mat15::Zero();
};

struct FusionResult {
  std::vector<PoseEstimate> estimates;         // one per increment
  std::vector<CovarianceSnapshot> covariances;  // one per aiding epoch, posterior
  std::vector<UpdateReport> updates;
};

/// Runs the filter over recorded streams. Aiding times must coincide (within
/// half an IMU interval) with increment end times and be strictly increasing;
/// StreamMisaligned otherwise.
FusionResult fuse_rollout(const std::vector<ImuIncrements>& imu,
                          const std::vector<AidingMeasurement>& aiding,
                          const StrapdownState& ic, const FilterTuning& tuning);

/// Row-major snapshot file: one line per epoch, "t,P00,P01,...,P1414".
void write_covariance_csv(const std::filesystem::path& path,
                          const std::vector<CovarianceSnapshot>& snaps);
std::vector<CovarianceSnapshot> read_covariance_csv(const std::filesystem::path& path);

}  // namespace gradesim
