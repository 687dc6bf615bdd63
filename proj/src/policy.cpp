#include "gradesim/policy.hpp"

#include "gradesim/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace gradesim {

std::optional<Blob> largest_blob(const Observation& obs, double target_h, double threshold) {
  const int R = static_cast<int>(obs.window.rows()), C = static_cast<int>(obs.window.cols());
  const double px_area = obs.spec.m_per_px * obs.spec.m_per_px;
  std::vector<int> label(static_cast<std::size_t>(R) * C, -1);
  std::optional<Blob> best;
  std::vector<std::pair<int, int>> stack;
  int next = 0;

  for (int r0 = 0; r0 < R; ++r0) {
    for (int c0 = 0; c0 < C; ++c0) {
      if (label[r0 * C + c0] >= 0 || obs.window(r0, c0) - target_h <= threshold) continue;
      Blob b;
      double wr = 0.0, wc = 0.0;
      std::vector<std::pair<int, int>> members;
      stack.assign(1, {r0, c0});
      label[r0 * C + c0] = next;
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        members.emplace_back(r, c);
        const double v = (obs.window(r, c) - target_h) * px_area;
        b.volume += v;
        wr += v * r;
        wc += v * c;
        const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& n : nb) {
          if (n[0] < 0 || n[1] < 0 || n[0] >= R || n[1] >= C) continue;
          int& l = label[n[0] * C + n[1]];
          if (l >= 0 || obs.window(n[0], n[1]) - target_h <= threshold) continue;
          l = next;
          stack.push_back({n[0], n[1]});
        }
      }
      ++next;
      // Ties go to the region found first, which keeps the choice deterministic.
      if (best && b.volume <= best->volume) continue;
      b.pixels = static_cast<int>(members.size());
      b.centroid = pixel_to_world(obs.spec, obs.est_pose, wr / b.volume, wc / b.volume);
      b.min_x = std::numeric_limits<double>::infinity();
      b.max_x = -b.min_x;
      for (const auto& [r, c] : members) {
        const Vec2 w = pixel_to_world(obs.spec, obs.est_pose, r, c);
        b.points.push_back(w);
        b.min_x = std::min(b.min_x, w.x());
        b.max_x = std::max(b.max_x, w.x());
      }
      best = std::move(b);
    }
  }
  return best;
}

HeuristicPolicy::HeuristicPolicy(const HeuristicOptions& opts, Vec2 map_extent, double dump_x)
    : opts_(opts), extent_(map_extent), dump_x_(dump_x) {}

Vec2 HeuristicPolicy::clamp_to_map(const Vec2& p) const {
  const double m = opts_.edge_margin;
  return {std::clamp(p.x(), m, extent_.x() - m), std::clamp(p.y(), m, extent_.y() - m)};
}

std::optional<WaypointAction> HeuristicPolicy::decide(const Observation& obs) {
  const auto blob = largest_blob(obs, opts_.target_h, opts_.threshold);
  if (!blob) return std::nullopt;

  const Vec2 pos = obs.est_pose.p.head<2>();
  const Vec2 to_blob = blob->centroid - pos;
  const double angle = std::atan2(std::abs(to_blob.y()), to_blob.x());
  const bool behind = blob->min_x - pos.x() < opts_.clearance * 0.5;

  WaypointAction a;
  if (angle > opts_.max_push_angle || behind) {
    // Line up behind the blob, square to the dump side. When the map edge
    // leaves no room to do better than the current pose, push from here.
    a.kind = ActionKind::kReposition;
    a.goto_pt = clamp_to_map({blob->min_x - opts_.clearance, blob->centroid.y()});
    a.reverse_to = clamp_to_map(a.goto_pt - Vec2(opts_.reverse_dist, 0.0));
    if ((a.goto_pt - pos).norm() > opts_.min_reposition) return a;
  }

  const Vec2 dir = to_blob.normalized();
  a.kind = ActionKind::kPush;
  if (opts_.extend_to_dump) {
    const double t = (dump_x_ + opts_.dump_margin - pos.x()) / dir.x();
    const Vec2 end = pos + t * dir;
    a.goto_pt = clamp_to_map(end);
    a.goto_pt.x() = std::clamp(end.x(), opts_.edge_margin, extent_.x() - opts_.dump_edge_margin);
  } else {
    // Leading edge of the blob along the push line.
    double reach = 0.0;
    const double half_px = 0.5 * obs.spec.m_per_px;
    for (const auto& w : blob->points) {
      const Vec2 d = w - pos;
      const double along = d.dot(dir);
      const double across = std::abs(d.x() * dir.y() - d.y() * dir.x());
      if (across <= half_px * std::sqrt(2.0)) reach = std::max(reach, along);
    }
    a.goto_pt = clamp_to_map(pos + reach * dir);
  }
  a.reverse_to = clamp_to_map(pos - opts_.back_off * dir);
  return a;
}

std::string observation_hash(const Observation& obs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(obs.window.data());
  const std::size_t n = static_cast<std::size_t>(obs.window.size()) * sizeof(double);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= bytes[k];
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ReplayPolicy::ReplayPolicy(std::vector<ReplayRecord> records, bool strict)
    : records_(std::move(records)), used_(records_.size(), false), strict_(strict) {
  for (std::size_t k = 0; k < records_.size(); ++k) by_hash_.emplace(records_[k].obs_hash, k);
}

ReplayPolicy ReplayPolicy::load(const std::filesystem::path& path, bool strict) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open replay file " + path.string());
  std::vector<ReplayRecord> recs;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ReplayRecord r;
      r.obs_hash = j.value("obs_hash", "");
      r.action.goto_pt = Vec2(j.at("goto").at(0).get<double>(), j.at("goto").at(1).get<double>());
      r.action.reverse_to =
          Vec2(j.at("reverse_to").at(0).get<double>(), j.at("reverse_to").at(1).get<double>());
      r.action.kind = j.value("kind", "push") == "reposition" ? ActionKind::kReposition
                                                              : ActionKind::kPush;
      recs.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ReplayPolicy(std::move(recs), strict);
}

std::optional<WaypointAction> ReplayPolicy::decide(const Observation& obs) {
  const auto it = by_hash_.find(observation_hash(obs));
  if (it != by_hash_.end()) {
    used_[it->second] = true;
    return records_[it->second].action;
  }
  if (strict_) return std::nullopt;
  while (cursor_ < records_.size() && used_[cursor_]) ++cursor_;
  if (cursor_ == records_.size()) return std::nullopt;
  used_[cursor_] = true;
  return records_[cursor_++].action;
}

void write_replay_record(std::ostream& os, const ReplayRecord& rec) {
  nlohmann::json j = {
      {"obs_hash", rec.obs_hash},
      {"goto", {rec.action.goto_pt.x(), rec.action.goto_pt.y()}},
      {"reverse_to", {rec.action.reverse_to.x(), rec.action.reverse_to.y()}},
      {"kind", rec.action.kind == ActionKind::kPush ? "push" : "reposition"}};
  os << j.dump() << '\n';
}

FollowerState start_leg(const WaypointAction& a, const Pose& est_pose, const FollowerParams& p,
                        double budget_factor, double budget_slack) {
  FollowerState f;
  f.target = a.goto_pt;
  f.reverse_to = a.reverse_to;
  const double dist = (a.goto_pt - est_pose.p.head<2>()).norm() + (a.reverse_to - a.goto_pt).norm();
  f.budget = budget_factor * dist / p.speed + budget_slack;
  return f;
}

FollowCommand follow_step(FollowerState& f, const Pose& est_pose, double dt,
                          const FollowerParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("follow_step: dt must be > 0");
  FollowCommand cmd;
  if (f.phase == FollowPhase::kDone) return cmd;

  f.elapsed += dt;
  if (f.elapsed > f.budget) {
    cmd.timed_out = true;
    return cmd;
  }

  const Vec2 pos = est_pose.p.head<2>();
  const Vec2 goal = f.phase == FollowPhase::kDrive ? f.target : f.reverse_to;
  const Vec2 d = goal - pos;
  const double dist = d.norm();

  // Reversing keeps the blade facing away from the goal.
  const bool rev = f.phase == FollowPhase::kReverse;
  const double desired = rev ? std::atan2(-d.y(), -d.x()) : std::atan2(d.y(), d.x());
  const double err = wrap_angle(desired - est_pose.att.psi);
  const bool passed = dist < p.pass_radius && std::abs(err) > 0.5 * kPi;
  if (dist <= p.capture_radius || passed) {
    f.phase = f.phase == FollowPhase::kDrive ? FollowPhase::kReverse : FollowPhase::kDone;
    cmd.phase_changed = true;
    return cmd;
  }

  const double rate = std::clamp(p.gain * err, -p.max_turn_rate, p.max_turn_rate);
  cmd.dpsi = rate * dt;
  double v = p.speed * std::max(0.0, std::cos(err));
  if (dist < p.slow_radius && std::abs(err) > p.slow_turn_angle) v = 0.0;
  cmd.speed = rev ? -v : v;
  return cmd;
}

}  // namespace gradesim
