#include "doctest.h"
#include "test_helpers.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/policy.hpp"

#include <fstream>
#include <sstream>

using namespace gradesim;

// Blob reference from tests/oracles/policy_oracle.py.

namespace {
Pose pose(double x, double y, double psi) {
  Pose p;
  p.p = Vec3(x, y, 0.0);
  p.att.psi = psi;
  return p;
}

Observation window_obs(const Eigen::MatrixXd& w) {
  Observation o;
  o.window = w;
  o.spec.rows = static_cast<int>(w.rows());
  o.spec.cols = static_cast<int>(w.cols());
  o.est_pose = pose(1.0, 1.0, 0.0);
  return o;
}

const Vec2 kExtent(2.5, 2.5);
}  // namespace

TEST_CASE("largest blob by volume, 4-connected") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(8, 8);
  w.block(1, 1, 2, 3).setConstant(0.02);
  w.block(5, 5, 3, 2).setConstant(0.03);
  w(4, 4) = 0.05;
  w(0, 7) = 0.004;
  const Observation o = window_obs(w);
  const auto b = largest_blob(o, 0.0, 0.005);
  REQUIRE(b);
  CHECK(b->volume == doctest::Approx(0.00011250000000000002).epsilon(1e-13));
  CHECK(b->pixels == 6);
  const Vec2 c = pixel_to_world(o.spec, o.est_pose, 5.999999999999999, 5.5);
  CHECK(b->centroid.isApprox(c, 1e-12));
}

TEST_CASE("flat window: no sand visible") {
  HeuristicPolicy pol(HeuristicOptions{}, kExtent, 2.3);
  Observation o = render_observation(Heightmap::flat(100, 100, 0.025), pose(0.5, 1.0, 0.0),
                                     WindowSpec{});
  CHECK_FALSE(pol.decide(o).has_value());
}

TEST_CASE("single pile ahead: push across it") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  const PileSpec pile{Vec2(1.2, 1.25), 0.003, 0.075};
  add_gaussian_pile(hm, pile);
  const Pose p = pose(0.6, 1.25, 0.0);
  const Observation o = render_observation(hm, p, WindowSpec{});

  HeuristicOptions opts;
  opts.extend_to_dump = false;
  const auto a = HeuristicPolicy(opts, kExtent, 2.3).decide(o);
  REQUIRE(a);
  CHECK(a->kind == ActionKind::kPush);
  // Analytic blob boundary: where the pile height falls to the threshold.
  const double peak = pile.volume / (2 * kPi * pile.sigma * pile.sigma);
  const double radius = pile.sigma * std::sqrt(2.0 * std::log(peak / opts.threshold));
  CHECK(std::abs(a->goto_pt.x() - (pile.center.x() + radius)) <= 0.025);
  CHECK(a->goto_pt.y() == doctest::Approx(1.25).epsilon(1e-3));
  CHECK(a->reverse_to.x() == doctest::Approx(0.6 - opts.back_off));

  const auto blob = largest_blob(o, 0.0, opts.threshold);
  CHECK(std::abs(blob->min_x - (pile.center.x() - radius)) <= 0.025);

  const auto ext = HeuristicPolicy(HeuristicOptions{}, kExtent, 2.3).decide(o);
  CHECK(ext->goto_pt.x() == doctest::Approx(2.3 + HeuristicOptions{}.dump_margin));
  const auto edge = HeuristicPolicy(HeuristicOptions{}, kExtent, 2.42).decide(o);
  CHECK(edge->goto_pt.x() == doctest::Approx(2.5 - HeuristicOptions{}.dump_edge_margin));
}

TEST_CASE("pile far off the push line: reposition behind it") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  const PileSpec pile{Vec2(1.1, 1.8), 0.003, 0.075};
  add_gaussian_pile(hm, pile);
  const Pose p = pose(0.6, 1.0, 0.9);
  const Observation o = render_observation(hm, p, WindowSpec{});
  HeuristicOptions opts;
  const auto a = HeuristicPolicy(opts, kExtent, 2.3).decide(o);
  REQUIRE(a);
  CHECK(a->kind == ActionKind::kReposition);
  const auto blob = largest_blob(o, 0.0, opts.threshold);
  CHECK(a->goto_pt.x() == doctest::Approx(blob->min_x - opts.clearance));
  CHECK(a->goto_pt.y() == doctest::Approx(blob->centroid.y()));
  CHECK(a->reverse_to.x() == doctest::Approx(a->goto_pt.x() - opts.reverse_dist));
}

TEST_CASE("two piles: the larger one is targeted") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  add_gaussian_pile(hm, {Vec2(1.2, 0.95), 0.002, 0.07});
  add_gaussian_pile(hm, {Vec2(1.25, 1.55), 0.0035, 0.07});
  const Observation o = render_observation(hm, pose(0.5, 1.25, 0.0), WindowSpec{});
  const auto blob = largest_blob(o, 0.0, 0.005);
  REQUIRE(blob);
  CHECK(blob->centroid.y() > 1.4);
  const auto a = HeuristicPolicy(HeuristicOptions{}, kExtent, 2.3).decide(o);
  REQUIRE(a);
  CHECK(a->goto_pt.y() > 1.25);
}

TEST_CASE("waypoints are kept off the map edge") {
  Heightmap hm = Heightmap::flat(100, 100, 0.025);
  add_gaussian_pile(hm, {Vec2(1.2, 2.3), 0.003, 0.07});
  const Observation o = render_observation(hm, pose(0.5, 2.3, 0.0), WindowSpec{});
  HeuristicOptions opts;
  const auto a = HeuristicPolicy(opts, kExtent, 2.3).decide(o);
  REQUIRE(a);
  CHECK(a->goto_pt.y() <= 2.5 - opts.edge_margin + 1e-12);
  CHECK(a->goto_pt.x() <= 2.5 - opts.dump_edge_margin + 1e-12);
  CHECK(a->reverse_to.y() <= 2.5 - opts.edge_margin + 1e-12);
}

TEST_CASE("observation hash is stable and content sensitive") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  const Observation a = window_obs(w);
  w(2, 1) = 1e-9;
  const Observation b = window_obs(w);
  CHECK(observation_hash(a).size() == 16);
  CHECK(observation_hash(a) == observation_hash(window_obs(Eigen::MatrixXd::Zero(4, 4))));
  CHECK(observation_hash(a) != observation_hash(b));
}

TEST_CASE("replay policy: hash match first, then file order") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  const Observation o1 = window_obs(w);
  w(0, 0) = 0.1;
  const Observation o2 = window_obs(w);

  std::stringstream ss;
  ReplayRecord r1{"0000000000000000", {Vec2(1, 1), Vec2(0, 0), ActionKind::kPush}};
  ReplayRecord r2{observation_hash(o2), {Vec2(2, 2), Vec2(0, 0), ActionKind::kReposition}};
  write_replay_record(ss, r1);
  write_replay_record(ss, r2);
  const auto dir = testutil::scratch_dir("replay");
  {
    std::ofstream f(dir / "r.jsonl");
    f << ss.str();
  }
  ReplayPolicy pol = ReplayPolicy::load(dir / "r.jsonl");
  const auto a = pol.decide(o2);
  REQUIRE(a);
  CHECK(a->goto_pt == Vec2(2, 2));
  CHECK(a->kind == ActionKind::kReposition);
  const auto b = pol.decide(o1);
  REQUIRE(b);
  CHECK(b->goto_pt == Vec2(1, 1));
  CHECK_FALSE(pol.decide(o1).has_value());

  ReplayPolicy strict = ReplayPolicy::load(dir / "r.jsonl", true);
  CHECK_FALSE(strict.decide(o1).has_value());
  CHECK_THROWS_AS(ReplayPolicy::load(dir / "missing.jsonl"), IoError);
}

TEST_CASE("follower at the target switches phase without moving") {
  FollowerParams fp;
  WaypointAction a;
  a.goto_pt = Vec2(1.0, 1.0);
  a.reverse_to = Vec2(0.5, 1.0);
  FollowerState f = start_leg(a, pose(1.0, 1.0, 0.0), fp);
  const FollowCommand c = follow_step(f, pose(1.0, 1.0, 0.0), 0.01, fp);
  CHECK(c.phase_changed);
  CHECK(c.speed == 0.0);
  CHECK(c.dpsi == 0.0);
  CHECK(f.phase == FollowPhase::kReverse);
}

namespace {
// Drives the follower with a fixed yaw bias on the estimate; returns the
// time to reach the drive target.
double drive_time(double yaw_bias, double distance) {
  FollowerParams fp;
  WaypointAction a;
  a.goto_pt = Vec2(0.5 + distance, 1.0);
  a.reverse_to = Vec2(0.5, 1.0);
  Pose truth = pose(0.5, 1.0, 0.0);
  FollowerState f = start_leg(a, truth, fp);
  const double dt = 0.01;
  for (int k = 0; k < 100000; ++k) {
    Pose est = truth;
    est.att.psi += yaw_bias;
    const FollowCommand c = follow_step(f, est, dt, fp);
    if (c.timed_out) return -1.0;
    if (f.phase != FollowPhase::kDrive) return k * dt;
    truth.att.psi = wrap_angle(truth.att.psi + c.dpsi);
    truth.p.head<2>() += c.speed * dt * Vec2(std::cos(truth.att.psi), std::sin(truth.att.psi));
  }
  return -1.0;
}
}  // namespace

TEST_CASE("follower arrival time on a straight line") {
  const double d = 1.2;
  const double t = drive_time(0.0, d);
  const double capture = FollowerParams{}.capture_radius;
  CHECK(t == doctest::Approx((d - capture) / FollowerParams{}.speed).epsilon(0.02));
}

TEST_CASE("a yaw bias bends the path and costs time") {
  const double t0 = drive_time(0.0, 1.2);
  const double t1 = drive_time(10.0 * kDegToRad, 1.2);
  CHECK(t1 > t0);
}

TEST_CASE("follower reports a timeout when the budget runs out") {
  FollowerParams fp;
  WaypointAction a;
  a.goto_pt = Vec2(2.0, 1.0);
  FollowerState f = start_leg(a, pose(0.5, 1.0, 0.0), fp);
  f.budget = 0.05;
  bool timed_out = false;
  for (int k = 0; k < 10 && !timed_out; ++k) timed_out = follow_step(f, pose(0.5, 1.0, 0.0), 0.01, fp).timed_out;
  CHECK(timed_out);
}
