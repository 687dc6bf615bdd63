#pragma once

#include "gradesim/geometry.hpp"
#include "gradesim/trajectory.hpp"

#include <cstdint>
#include <random>
#include <utility>

namespace gradesim {

enum class AidingNoiseMode {
  kGaussian,     // zero-mean Gaussian, dp_err / dpsi_err are per-axis std
  kFixedOffset,  // dp_err / dpsi_err added as-is to every measurement
};

/// Stochastic error model for the inertial sensor, the initial conditions and
/// the aiding pose sensor. SI units; attitude triples stacked (roll, pitch, yaw).
struct NoiseConfig {
  Vec3 b_c = Vec3::Zero();       // accel constant bias [m/s^2]
  Vec3 d_c = Vec3::Zero();       // gyro constant bias [rad/s]
  Vec3 a_rw = Vec3::Zero();      // accel random walk [m/s/sqrt(s)]
  Vec3 g_rw = Vec3::Zero();      // gyro random walk [rad/sqrt(s)]
  Vec3 dp_ic = Vec3::Zero();     // initial position error [m]
  Vec3 dv_ic = Vec3::Zero();     // initial velocity error [m/s]
  Vec3 dpsi_ic = Vec3::Zero();   // initial attitude error [rad]
  Vec3 dp_err = Vec3::Zero();    // aiding position noise [m]
  Vec3 dpsi_err = Vec3::Zero();  // aiding attitude noise [rad]
  AidingNoiseMode aiding_mode = AidingNoiseMode::kGaussian;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument if a std field is negative or anything is non-finite.
  void validate() const;
  bool is_zero() const;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of sub-stream `stream` of `base`. Documented rule shared by every
/// consumer: splitmix64(base ^ splitmix64(stream + 1)).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Independent generators owned by one rollout. Each consumer draws only from
/// its own stream, so results do not depend on evaluation order.
class RolloutRng {
 public:
  enum Stream : std::uint64_t { kImu = 0, kAiding = 1, kEpisode = 2, kAugment = 3 };

  explicit RolloutRng(std::uint64_t seed);

  std::mt19937_64& imu() { return imu_; }
  std::mt19937_64& aiding() { return aiding_; }
  std::mt19937_64& episode() { return episode_; }
  std::mt19937_64& augment() { return augment_; }

 private:
  std::mt19937_64 imu_;
  std::mt19937_64 aiding_;
  std::mt19937_64 episode_;
  std::mt19937_64 augment_;
};

double standard_normal(std::mt19937_64& rng);
Vec3 standard_normal3(std::mt19937_64& rng);

/// Adds constant bias and random walk to clean increments. Draws 3 normals for
/// q_v then 3 for q_t, every call.
ImuIncrements corrupt_imu(const ImuIncrements& inc, const NoiseConfig& cfg,
                          std::mt19937_64& rng);

/// Deterministic initial-condition errors: additive position and velocity,
/// attitude composed as h(F(psi) F(dpsi)).
std::pair<Pose, Vec3> corrupt_ic(const Pose& truth, const Vec3& v, const NoiseConfig& cfg);

/// Noisy aiding pose. Draws 3 normals for position then 3 for attitude
/// (Gaussian mode only).
Pose corrupt_aiding(const Pose& truth, const NoiseConfig& cfg, std::mt19937_64& rng);

}  // namespace gradesim
