#include "gradesim/noise.hpp"

#include <stdexcept>

namespace gradesim {

void NoiseConfig::validate() const {
  auto check_finite = [](const Vec3& v, const char* name) {
    if (!v.allFinite()) throw std::invalid_argument(std::string("NoiseConfig.") + name + " not finite");
  };
  auto check_std = [&](const Vec3& v, const char* name) {
    check_finite(v, name);
    if ((v.array() < 0.0).any()) {
      throw std::invalid_argument(std::string("NoiseConfig.") + name + " must be >= 0");
    }
  };
  check_finite(b_c, "b_c");
  check_finite(d_c, "d_c");
  check_std(a_rw, "a_rw");
  check_std(g_rw, "g_rw");
  check_finite(dp_ic, "dp_ic");
  check_finite(dv_ic, "dv_ic");
  check_finite(dpsi_ic, "dpsi_ic");
  check_std(dp_err, "dp_err");
  check_std(dpsi_err, "dpsi_err");
}

bool NoiseConfig::is_zero() const {
  return b_c.isZero(0) && d_c.isZero(0) && a_rw.isZero(0) && g_rw.isZero(0) &&
         dp_ic.isZero(0) && dv_ic.isZero(0) && dpsi_ic.isZero(0) && dp_err.isZero(0) &&
         dpsi_err.isZero(0);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

RolloutRng::RolloutRng(std::uint64_t seed)
    : imu_(derive_seed(seed, kImu)),
      aiding_(derive_seed(seed, kAiding)),
      episode_(derive_seed(seed, kEpisode)),
      augment_(derive_seed(seed, kAugment)) {}

double standard_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

Vec3 standard_normal3(std::mt19937_64& rng) {
  // Sequenced explicitly; argument evaluation order is unspecified.
  const double a = standard_normal(rng);
  const double b = standard_normal(rng);
  const double c = standard_normal(rng);
  return {a, b, c};
}

namespace {

// x + bias*dt + rw*sqrt(dt)*w, leaving an axis untouched when both terms vanish
// so that a zero model is the identity bit for bit.
Vec3 add_sensor_error(const Vec3& x, const Vec3& bias, const Vec3& rw, const Vec3& w, double dt) {
  Vec3 out = x;
  const double sq = std::sqrt(dt);
  for (int a = 0; a < 3; ++a) {
    if (bias[a] != 0.0) out[a] += bias[a] * dt;
    if (rw[a] != 0.0) out[a] += rw[a] * sq * w[a];
  }
  return out;
}

EulerAngles compose_attitude(const EulerAngles& att, const Vec3& err) {
  if (err.isZero(0)) return att;
  return d2e(e2d(att) * e2d(err));
}

}  // namespace

ImuIncrements corrupt_imu(const ImuIncrements& inc, const NoiseConfig& cfg,
                          std::mt19937_64& rng) {
  const Vec3 w_v = standard_normal3(rng);
  const Vec3 w_t = standard_normal3(rng);
  ImuIncrements out = inc;
  out.q_v = add_sensor_error(inc.q_v, cfg.b_c, cfg.a_rw, w_v, inc.dt);
  out.q_t = add_sensor_error(inc.q_t, cfg.d_c, cfg.g_rw, w_t, inc.dt);
  return out;
}

std::pair<Pose, Vec3> corrupt_ic(const Pose& truth, const Vec3& v, const NoiseConfig& cfg) {
  Pose p = truth;
  Vec3 v_e = v;
  for (int a = 0; a < 3; ++a) {
    if (cfg.dp_ic[a] != 0.0) p.p[a] += cfg.dp_ic[a];
    if (cfg.dv_ic[a] != 0.0) v_e[a] += cfg.dv_ic[a];
  }
  p.att = compose_attitude(truth.att, cfg.dpsi_ic);
  return {p, v_e};
}

Pose corrupt_aiding(const Pose& truth, const NoiseConfig& cfg, std::mt19937_64& rng) {
  Vec3 dp, dpsi;
  if (cfg.aiding_mode == AidingNoiseMode::kGaussian) {
    dp = standard_normal3(rng).cwiseProduct(cfg.dp_err);
    dpsi = standard_normal3(rng).cwiseProduct(cfg.dpsi_err);
  } else {
    dp = cfg.dp_err;
    dpsi = cfg.dpsi_err;
  }
  Pose out = truth;
  for (int a = 0; a < 3; ++a) {
    if (cfg.dp_err[a] != 0.0) out.p[a] += dp[a];
  }
  out.att = compose_attitude(truth.att, cfg.dpsi_err.isZero(0) ? Vec3::Zero().eval() : dpsi);
  return out;
}

}  // namespace gradesim
