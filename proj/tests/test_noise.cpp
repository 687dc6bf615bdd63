#include "doctest.h"

#include "gradesim/noise.hpp"

#include <vector>

using namespace gradesim;

// Seed values from tests/oracles/noise_oracle.py.

TEST_CASE("splitmix64 and seed splitting") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(1) == 0x910a2dec89025cc1ULL);
  CHECK(derive_seed(1, 0) == 0xe9fd6049d65af21eULL);
  CHECK(derive_seed(42, 3) == 0x8e34a8db17849847ULL);
}

TEST_CASE("streams of one rollout are independent of each other") {
  RolloutRng a(7), b(7);
  for (int k = 0; k < 100; ++k) standard_normal(b.aiding());
  CHECK(standard_normal(a.imu()) == standard_normal(b.imu()));
  CHECK(a.imu()() != a.aiding()());
}

TEST_CASE("a zero model leaves everything untouched bit for bit") {
  NoiseConfig cfg;
  CHECK(cfg.is_zero());
  std::mt19937_64 rng(3);
  ImuIncrements inc;
  inc.q_t = Vec3(1e-3, -2e-3, 0.3);
  inc.q_v = Vec3(0.01, 0.02, -0.098);
  inc.dt = 0.01;
  const ImuIncrements out = corrupt_imu(inc, cfg, rng);
  CHECK(out.q_t == inc.q_t);
  CHECK(out.q_v == inc.q_v);

  Pose p;
  p.p = Vec3(1, 2, 3);
  p.att = {0.3, 0.1, -0.2};
  const Pose a = corrupt_aiding(p, cfg, rng);
  CHECK(a.p == p.p);
  CHECK(a.att.psi == p.att.psi);
  const auto [ic, v] = corrupt_ic(p, Vec3(0.1, 0, 0), cfg);
  CHECK(ic.p == p.p);
  CHECK(v == Vec3(0.1, 0, 0));
}

TEST_CASE("constant biases scale with the interval") {
  NoiseConfig cfg;
  cfg.b_c = Vec3(0.02, -0.01, 0.0);
  cfg.d_c = Vec3(0.0, 0.0, 1e-3);
  std::mt19937_64 rng(1);
  ImuIncrements inc;
  inc.dt = 0.01;
  const ImuIncrements out = corrupt_imu(inc, cfg, rng);
  CHECK(out.q_v.x() == doctest::Approx(2e-4));
  CHECK(out.q_v.y() == doctest::Approx(-1e-4));
  CHECK(out.q_t.z() == doctest::Approx(1e-5));
}

TEST_CASE("random walk increments have std rw * sqrt(dt)") {
  NoiseConfig cfg;
  cfg.a_rw = Vec3::Constant(0.05);
  std::mt19937_64 rng(11);
  ImuIncrements inc;
  inc.dt = 0.01;
  const int n = 20000;
  double s2 = 0.0;
  for (int k = 0; k < n; ++k) s2 += std::pow(corrupt_imu(inc, cfg, rng).q_v.x(), 2);
  const double expected = 0.05 * 0.1;
  CHECK(std::sqrt(s2 / n) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("aiding noise modes") {
  NoiseConfig cfg;
  cfg.dp_err = Vec3(0.05, 0.0, 0.0);
  cfg.dpsi_err = Vec3(0.0, 0.0, 0.1);
  cfg.aiding_mode = AidingNoiseMode::kFixedOffset;
  std::mt19937_64 rng(1);
  Pose p;
  const Pose a = corrupt_aiding(p, cfg, rng);
  CHECK(a.p.x() == doctest::Approx(0.05));
  CHECK(a.p.y() == 0.0);
  CHECK(a.att.psi == doctest::Approx(0.1));

  cfg.aiding_mode = AidingNoiseMode::kGaussian;
  double s2 = 0.0;
  for (int k = 0; k < 20000; ++k) s2 += std::pow(corrupt_aiding(p, cfg, rng).p.x(), 2);
  CHECK(std::sqrt(s2 / 20000) == doctest::Approx(0.05).epsilon(0.03));
}

TEST_CASE("initial-condition errors compose the attitude") {
  NoiseConfig cfg;
  cfg.dp_ic = Vec3(0.05, -0.05, 0.0);
  cfg.dpsi_ic = Vec3(0.0, 0.0, 0.1);
  Pose p;
  p.att.psi = 0.5;
  const auto [ic, v] = corrupt_ic(p, Vec3::Zero(), cfg);
  CHECK(ic.p.x() == doctest::Approx(0.05));
  CHECK(ic.att.psi == doctest::Approx(0.6));
}

TEST_CASE("validation") {
  NoiseConfig cfg;
  cfg.a_rw.x() = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.a_rw.x() = 0.0;
  cfg.b_c.y() = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
