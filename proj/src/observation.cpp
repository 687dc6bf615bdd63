#include "gradesim/observation.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/noise.hpp"

namespace gradesim {

namespace {
Vec2 heading_dir(double psi) { return {std::cos(psi), std::sin(psi)}; }
Vec2 right_dir(double psi) { return {-std::sin(psi), std::cos(psi)}; }
}  // namespace

Vec2 pixel_to_world(const WindowSpec& spec, const Pose& pose, double r, double c) {
  const double s = spec.forward_offset + (0.5 * spec.rows - 0.5 - r) * spec.m_per_px;
  const double l = (c - (0.5 * spec.cols - 0.5)) * spec.m_per_px;
  const double psi = pose.att.psi;
  return pose.p.head<2>() + s * heading_dir(psi) + l * right_dir(psi);
}

Vec2 world_to_pixel(const WindowSpec& spec, const Pose& pose, const Vec2& world) {
  const Vec2 b = to_body_frame(pose, world);
  const double r = 0.5 * spec.rows - 0.5 - (b.x() - spec.forward_offset) / spec.m_per_px;
  const double c = 0.5 * spec.cols - 0.5 + b.y() / spec.m_per_px;
  return {r, c};
}

double sample_height(const Heightmap& hm, const Vec2& world) {
  const double fx = world.x() / hm.cell_size - 0.5;
  const double fy = world.y() / hm.cell_size - 0.5;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  const double ax = fx - x0, ay = fy - y0;
  const int ix = static_cast<int>(x0), iy = static_cast<int>(y0);
  auto h = [&](int x, int y) { return hm.contains(x, y) ? hm.at(x, y) : hm.target_h; };
  return (1 - ay) * ((1 - ax) * h(ix, iy) + ax * h(ix + 1, iy)) +
         ay * ((1 - ax) * h(ix, iy + 1) + ax * h(ix + 1, iy + 1));
}

Observation render_observation(const Heightmap& hm, const Pose& est_pose, const WindowSpec& spec,
                               double t) {
  if (!hm.contains(Vec2(est_pose.p.head<2>()))) {
    throw OutOfBounds("render_observation: pose (" + std::to_string(est_pose.p.x()) + ", " +
                      std::to_string(est_pose.p.y()) + ") outside the map");
  }
  Observation o;
  o.est_pose = est_pose;
  o.t = t;
  o.spec = spec;
  o.window.resize(spec.rows, spec.cols);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      o.window(r, c) = sample_height(hm, pixel_to_world(spec, est_pose, r, c));
    }
  }
  return o;
}

Vec2 to_body_frame(const Pose& pose, const Vec2& world) {
  const Vec2 d = world - pose.p.head<2>();
  return {d.dot(heading_dir(pose.att.psi)), d.dot(right_dir(pose.att.psi))};
}

Vec2 from_body_frame(const Pose& pose, const Vec2& body) {
  return pose.p.head<2>() + body.x() * heading_dir(pose.att.psi) +
         body.y() * right_dir(pose.att.psi);
}

Mat3 pose_marginal(const Eigen::Matrix<double, 15, 15>& P) {
  const int idx[3] = {0, 1, 5};
  Mat3 m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(a, b) = P(idx[a], idx[b]);
  return m;
}

std::vector<AugmentedSample> sample_observations(const Heightmap& hm, const Pose& est_pose,
                                                 const Mat3& cov, int k, std::mt19937_64& rng,
                                                 const WindowSpec& spec,
                                                 const WaypointAction& action,
                                                 const AugmentOptions& opts) {
  if (k < 1) throw std::invalid_argument("sample_observations: k must be >= 1");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (cov + cov.transpose()));
  if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw std::invalid_argument("sample_observations: covariance not PSD");
  }
  const Mat3 L = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::vector<AugmentedSample> out;
  out.reserve(k);
  for (int j = 0; j < k; ++j) {
    Pose pose = est_pose;
    bool ok = false;
    for (int attempt = 0; attempt <= opts.max_redraws && !ok; ++attempt) {
      const Vec3 d = L * standard_normal3(rng);
      Pose cand = est_pose;
      cand.p.x() += d.x();
      cand.p.y() += d.y();
      cand.att.psi = wrap_angle(est_pose.att.psi + d.z());
      if (hm.contains(Vec2(cand.p.head<2>()))) {
        pose = cand;
        ok = true;
      }
    }
    WindowSpec s = spec;
    if (opts.scale_std > 0.0) s.m_per_px *= std::max(0.1, 1.0 + opts.scale_std * standard_normal(rng));

    AugmentedSample a;
    a.sample_pose = pose;
    a.obs = render_observation(hm, pose, s, 0.0);
    a.labels.goto_pt = to_body_frame(pose, action.goto_pt);
    a.labels.reverse_to = to_body_frame(pose, action.reverse_to);
    a.labels.kind = action.kind;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace gradesim
