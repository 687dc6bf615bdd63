#include "doctest.h"
#include "test_helpers.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/observation.hpp"

using namespace gradesim;

// Pixel and bilinear references from tests/oracles/observation_oracle.py.

namespace {
Pose pose(double x, double y, double psi) {
  Pose p;
  p.p = Vec3(x, y, 0.0);
  p.att.psi = psi;
  return p;
}

Heightmap piled_map() {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  add_gaussian_pile(hm, {Vec2(1.3, 1.2), 0.003, 0.07});
  add_gaussian_pile(hm, {Vec2(1.6, 1.5), 0.002, 0.06});
  return hm;
}
}  // namespace

TEST_CASE("pixel geometry") {
  const WindowSpec spec;
  const Pose p = pose(1.0, 1.2, 0.3);
  const Vec2 a = pixel_to_world(spec, p, 0, 0);
  CHECK(a.x() == doctest::Approx(2.701552014776424).epsilon(1e-14));
  CHECK(a.y() == doctest::Approx(0.9020348325553947).epsilon(1e-14));
  const Vec2 c = pixel_to_world(spec, p, 31.5, 31.5);
  CHECK(c.x() == doctest::Approx(1.7165023668442045).epsilon(1e-14));
  CHECK(c.y() == doctest::Approx(1.4216401549960045).epsilon(1e-14));
  const Vec2 b = pixel_to_world(spec, p, 63, 10);
  CHECK(b.x() == doctest::Approx(1.1230169927382596).epsilon(1e-14));
  CHECK(b.y() == doctest::Approx(0.6754246293451864).epsilon(1e-14));
  const Vec2 rc = world_to_pixel(spec, p, b);
  CHECK(rc.x() == doctest::Approx(63.0));
  CHECK(rc.y() == doctest::Approx(10.0));
}

TEST_CASE("bilinear sampling between cell centers") {
  Heightmap hm = Heightmap::flat(8, 8, 0.025);
  for (int iy = 0; iy < 8; ++iy)
    for (int ix = 0; ix < 8; ++ix) hm.at(ix, iy) = 0.001 * ix + 0.002 * iy * iy + 0.0005 * ix * iy;
  CHECK(sample_height(hm, {0.05, 0.07}) == doctest::Approx(0.014225000000000002).epsilon(1e-13));
  CHECK(sample_height(hm, {0.1234, 0.0987}) ==
        doctest::Approx(0.036355663999999996).epsilon(1e-13));
  CHECK(sample_height(hm, {0.0125, 0.0125}) == 0.0);
  CHECK(sample_height(hm, {-1.0, 0.1}) == hm.target_h);
}

TEST_CASE("flat map gives a constant window anywhere") {
  const Heightmap hm = Heightmap::flat(100, 100, 0.025, 0.02);
  for (const Pose& p : {pose(0.3, 0.3, 0.0), pose(2.0, 1.0, 2.5), pose(1.2, 2.2, -1.0)}) {
    const Observation o = render_observation(hm, p, WindowSpec{});
    CHECK(o.window.rows() == 64);
    CHECK(o.window.cols() == 64);
    CHECK((o.window.array() - 0.02).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("window at the true pose is a direct crop") {
  const Heightmap hm = piled_map();
  // Axis-aligned pose on a cell corner: with a half-pixel window offset every
  // pixel center lands on a cell center.
  const Pose p = pose(0.5, 1.2, 0.0);
  WindowSpec spec;
  spec.forward_offset = 0.8;
  const Observation o = render_observation(hm, p, spec);
  for (int r = 0; r < 64; r += 7) {
    for (int c = 0; c < 64; c += 5) {
      const Vec2 w = pixel_to_world(spec, p, r, c);
      const int ix = static_cast<int>(std::floor(w.x() / 0.025));
      const int iy = static_cast<int>(std::floor(w.y() / 0.025));
      CHECK(o.window(r, c) == doctest::Approx(hm.at(ix, iy)).epsilon(1e-12));
    }
  }
}

TEST_CASE("a 5 cm forward registration error shifts the window by two rows") {
  const Heightmap hm = piled_map();
  const Pose truth = pose(0.6, 1.3, 0.0);
  const Pose est = pose(0.65, 1.3, 0.0);
  const Eigen::MatrixXd a = render_observation(hm, truth, WindowSpec{}).window;
  const Eigen::MatrixXd b = render_observation(hm, est, WindowSpec{}).window;
  int best = 0;
  double best_score = -1.0;
  for (int k = -5; k <= 5; ++k) {
    double s = 0.0;
    for (int r = 5; r < 59; ++r) s += b.row(r).dot(a.row(r - k));
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  CHECK(best == 2);
}

TEST_CASE("a pose off the map cannot be rendered") {
  const Heightmap hm = piled_map();
  CHECK_THROWS_AS(render_observation(hm, pose(-0.1, 1.0, 0.0), WindowSpec{}), OutOfBounds);
}

TEST_CASE("body frame conversions") {
  const Pose p = pose(1.0, 2.0, kPi / 2);
  const Vec2 b = to_body_frame(p, {1.0, 3.0});
  CHECK(b.x() == doctest::Approx(1.0));
  CHECK(b.y() == doctest::Approx(0.0).scale(1.0));
  const Vec2 r = to_body_frame(p, {0.0, 2.0});  // to the west, heading north-east frame: right
  CHECK(r.y() == doctest::Approx(1.0));
  const Vec2 w = from_body_frame(p, {0.3, -0.2});
  CHECK(to_body_frame(p, w).isApprox(Vec2(0.3, -0.2)));
}

TEST_CASE("pose marginal takes x, y and yaw") {
  Eigen::Matrix<double, 15, 15> P = Eigen::Matrix<double, 15, 15>::Zero();
  for (int k = 0; k < 15; ++k)
    for (int j = 0; j < 15; ++j) P(k, j) = 100 * k + j;
  const Mat3 m = pose_marginal(P);
  CHECK(m(0, 0) == 0);
  CHECK(m(1, 1) == 101);
  CHECK(m(2, 2) == 505);
  CHECK(m(0, 2) == 5);
  CHECK(m(2, 1) == 501);
}

TEST_CASE("zero covariance gives identical samples") {
  const Heightmap hm = piled_map();
  const Pose est = pose(0.6, 1.3, 0.1);
  std::mt19937_64 rng(3);
  WaypointAction a;
  a.goto_pt = Vec2(1.5, 1.4);
  a.reverse_to = Vec2(0.5, 1.3);
  const auto s = sample_observations(hm, est, Mat3::Zero(), 4, rng, WindowSpec{}, a);
  const Observation ref = render_observation(hm, est, WindowSpec{});
  REQUIRE(s.size() == 4);
  for (const auto& x : s) {
    CHECK(x.obs.window == ref.window);
    CHECK(x.sample_pose.p == est.p);
    CHECK(x.labels.goto_pt.isApprox(to_body_frame(est, a.goto_pt)));
  }
}

TEST_CASE("sampled poses follow the requested distribution") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  const Pose est = pose(1.2, 1.3, 0.2);
  Mat3 cov;
  cov << 4e-4, 1e-4, 0.0, 1e-4, 2.5e-4, 2e-4, 0.0, 2e-4, 7.6e-3;
  std::mt19937_64 rng(17);
  WindowSpec small;
  small.rows = small.cols = 4;
  const int k = 10000;
  const auto s = sample_observations(hm, est, cov, k, rng, small);
  Eigen::MatrixXd x(k, 3);
  for (int i = 0; i < k; ++i) {
    x(i, 0) = s[i].sample_pose.p.x();
    x(i, 1) = s[i].sample_pose.p.y();
    x(i, 2) = s[i].sample_pose.att.psi;
  }
  const Eigen::RowVector3d mu = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mu;
  const Mat3 emp = c.transpose() * c / (k - 1);
  CHECK((emp - cov).norm() < 0.05 * cov.norm());
  for (int a = 0; a < 3; ++a) {
    const double ref = a == 0 ? 1.2 : a == 1 ? 1.3 : 0.2;
    CHECK(std::abs(mu[a] - ref) < 3.0 * std::sqrt(cov(a, a) / k));
  }
}

TEST_CASE("samples off the map fall back to the estimate") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  const Pose est = pose(0.001, 1.0, 0.0);
  std::mt19937_64 rng(2);
  AugmentOptions opts;
  opts.max_redraws = 0;
  const Mat3 cov = Vec3(1.0, 1e-6, 1e-6).asDiagonal();
  const auto s = sample_observations(hm, est, cov, 50, rng, WindowSpec{}, {}, opts);
  for (const auto& x : s) CHECK(hm.contains(Vec2(x.sample_pose.p.head<2>())));
}
