#include "gradesim/episode.hpp"

#include "gradesim/errors.hpp"

#include <cstdio>
#include <fstream>

namespace gradesim {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kCleared: return "cleared";
    case Termination::kTimeBudget: return "time_budget";
    case Termination::kNoSandVisible: return "no_sand_visible";
    case Termination::kDiverged: return "diverged";
  }
  return "unknown";
}

namespace {

TrajectorySample sample_of(const DozerBody& d, double t, const Vec3& v) {
  TrajectorySample s;
  s.t = t;
  s.pose.p = Vec3(d.pose.p.x(), d.pose.p.y(), 0.0);
  s.pose.att.psi = d.pose.att.psi;
  s.v = v;
  return s;
}

long aid_every(const EpisodeConfig& cfg) {
  const double r = cfg.imu_rate / cfg.aid_rate;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - n) > 1e-9) {
    throw std::invalid_argument("episode: aid_rate must divide imu_rate");
  }
  return n;
}

}  // namespace

EpisodeState start_episode(const Episode& ep, const EpisodeConfig& cfg, RolloutRng& rng) {
  const TrajectorySample first = sample_of(ep.dozer, 0.0, Vec3::Zero());
  const auto [ic_pose, ic_v] = corrupt_ic(first.pose, first.v, cfg.noise);
  EpisodeState s(ep.map, ep.dozer, FusionFilter(ins_init(ic_pose, ic_v, 0.0), cfg.tuning), first,
                 cfg.tuning.options.g, rng);
  s.initial_volume = uncleared_volume(s.map);
  s.initial_total = s.map.total_volume();
  s.log.push_back({0.0, first.pose, s.filter.pose(), 0.0});
  return s;
}

LegEvents step_episode(EpisodeState& s, const WaypointAction& action, const EpisodeConfig& cfg,
                       bool survey) {
  if (s.terminated) throw std::logic_error("step_episode: episode already terminated");
  const double dt = 1.0 / cfg.imu_rate;
  const long every = aid_every(cfg);

  LegEvents ev;
  ev.leg.index = static_cast<int>(s.legs.size());
  ev.leg.kind = action.kind;
  ev.leg.survey = survey;
  ev.leg.start_t = s.t(cfg.imu_rate);
  ev.leg.action = action;

  FollowerParams fp = cfg.follower;
  fp.speed = s.dozer.speed;
  FollowerState f = start_leg(action, s.filter.pose(), fp, cfg.leg_budget_factor,
                              cfg.leg_budget_slack);

  // Only pushes lower the blade; repositioning and surveying drive over the sand.
  const bool blade_down = !survey && action.kind == ActionKind::kPush;

  auto diverge = [&](const std::string& why) {
    ev.diverged = true;
    s.terminated = true;
    s.termination = Termination::kDiverged;
    s.divergence_reason = why;
  };

  while (f.phase != FollowPhase::kDone && !s.terminated) {
    const FollowPhase phase_before = f.phase;
    const FollowCommand cmd = follow_step(f, s.filter.pose(), dt, fp);
    if (cmd.timed_out) {
      diverge("follower exceeded the leg time budget at t=" + std::to_string(s.t(cfg.imu_rate)));
      break;
    }
    // The audit covers the whole step, deposit included.
    const double before_total = cfg.check_conservation ? s.map.total_volume() : 0.0;
    const double before_load = s.dozer.blade_load;
    double deposit_dumped = 0.0;
    if (cmd.phase_changed && phase_before == FollowPhase::kDrive) {
      deposit_dumped = deposit_load(s.map, s.dozer, cfg.rules);
    }

    // True motion: turn, then move along the new heading.
    const Vec3 p_prev = s.dozer.pose.p;
    s.dozer.pose.att.psi = wrap_angle(s.dozer.pose.att.psi + cmd.dpsi);
    double step = cmd.speed * dt;
    const Vec2 ahead = s.dozer.pose.p.head<2>() +
                       step * Vec2(std::cos(s.dozer.pose.att.psi), std::sin(s.dozer.pose.att.psi));
    if (!s.map.contains(ahead)) {
      // The sandbox wall stops the dozer; the follower keeps trying until
      // its time budget runs out.
      step = 0.0;
      ++s.wall_contacts;
    }
    SweepReport rep;
    try {
      rep = advance_dozer(s.map, s.dozer, step, cfg.rules, blade_down);
    } catch (const OutOfBounds& e) {
      diverge(e.what());
      break;
    }
    s.dumped += rep.dumped + deposit_dumped;
    if (cfg.check_conservation) {
      const double err = (s.map.total_volume() - before_total) + (s.dozer.blade_load - before_load) +
                         rep.dumped + deposit_dumped;
      const double denom = s.initial_total > 0.0 ? s.initial_total : 1.0;
      s.max_conservation_error = std::max(s.max_conservation_error, std::abs(err) / denom);
    }
    if (f.phase == FollowPhase::kDrive) ev.leg.peak_load = std::max(ev.leg.peak_load, s.dozer.blade_load);

    ++s.step;
    const double t = s.t(cfg.imu_rate);
    const TrajectorySample next = sample_of(s.dozer, t, (s.dozer.pose.p - p_prev) / dt);
    const ImuIncrements clean = s.synth.push(next);
    s.filter.propagate(corrupt_imu(clean, cfg.noise, s.rng->imu()));
    if (s.step % every == 0) {
      s.filter.aid(corrupt_aiding(next.pose, cfg.noise, s.rng->aiding()));
    }
    s.last_sample = next;
    if (cfg.log_every > 0 && s.step % cfg.log_every == 0) {
      s.log.push_back({t, next.pose, s.filter.pose(), s.dozer.blade_load});
    }
    if (t >= cfg.max_time - 1e-9) {
      s.terminated = true;
      s.termination = Termination::kTimeBudget;
    }
  }

  // A leg cut short by the time budget still puts its load down.
  if (!ev.diverged && s.dozer.blade_load > 0.0) s.dumped += deposit_load(s.map, s.dozer, cfg.rules);

  ev.leg.duration = s.t(cfg.imu_rate) - ev.leg.start_t;
  ev.leg.success = !survey && action.kind == ActionKind::kPush &&
                   decision_success(std::min(ev.leg.peak_load, s.dozer.blade_capacity),
                                    s.dozer.blade_capacity);
  s.legs.push_back(ev.leg);

  if (!s.terminated && uncleared_volume(s.map) < cfg.clear_fraction * s.initial_volume) {
    s.terminated = true;
    s.termination = Termination::kCleared;
  }
  ev.terminated = s.terminated;
  return ev;
}

EpisodeResult run_episode(const Episode& ep, Policy& policy, const EpisodeConfig& cfg,
                          RolloutRng& rng, const DecisionHook& hook) {
  EpisodeState s = start_episode(ep, cfg, rng);
  if (s.initial_volume <= 0.0) {
    s.terminated = true;
    s.termination = Termination::kCleared;
  }
  while (!s.terminated) {
    const Pose est = s.filter.pose();
    Observation obs;
    try {
      obs = render_observation(s.map, est, cfg.window, s.t(cfg.imu_rate));
    } catch (const OutOfBounds& e) {
      s.terminated = true;
      s.termination = Termination::kDiverged;
      s.divergence_reason = std::string("estimate left the map: ") + e.what();
      break;
    }
    std::optional<WaypointAction> a = policy.decide(obs);
    bool survey = false;
    if (!a) {
      const std::size_t stations = cfg.survey_xs.size() * cfg.survey_lanes.size();
      if (s.next_lane >= stations) {
        if (cfg.stop_after_survey || stations == 0) {
          s.terminated = true;
          s.termination = Termination::kNoSandVisible;
          break;
        }
        s.next_lane = 0;
      }
      const double x = cfg.survey_xs[s.next_lane / cfg.survey_lanes.size()];
      const double y = cfg.survey_lanes[s.next_lane % cfg.survey_lanes.size()];
      ++s.next_lane;
      WaypointAction sv;
      sv.kind = ActionKind::kReposition;
      sv.goto_pt = Vec2(x + 0.15, y);
      sv.reverse_to = Vec2(x, y);
      a = sv;
      survey = true;
    } else if (a->kind == ActionKind::kPush) {
      s.next_lane = 0;
    }
    if (hook && !survey) {
      hook(s.map, obs, *a, s.filter.covariance(), static_cast<int>(s.legs.size()));
    }
    step_episode(s, *a, cfg, survey);
  }

  EpisodeResult r;
  r.legs = std::move(s.legs);
  r.termination = s.termination;
  r.diverged = s.termination == Termination::kDiverged;
  r.divergence_reason = s.divergence_reason;
  r.initial_volume = s.initial_volume;
  r.dumped = s.dumped;
  r.max_conservation_error = s.max_conservation_error;
  r.steps = s.step;
  r.wall_contacts = s.wall_contacts;
  r.metrics.episode_time = s.t(cfg.imu_rate);
  r.metrics.uncleared_volume = uncleared_volume(s.map);
  r.metrics.legs = static_cast<int>(r.legs.size());
  r.log = std::move(s.log);
  r.final_map = std::move(s.map);
  return r;
}

void write_log_csv(const std::filesystem::path& path, const std::vector<TrajectoryLogRow>& log) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "t,x,y,psi,est_x,est_y,est_psi,blade_load\n";
  char buf[256];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.truth.p.x(), r.truth.p.y(), r.truth.att.psi, r.estimate.p.x(),
                  r.estimate.p.y(), r.estimate.att.psi, r.blade_load);
    f << buf;
  }
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace gradesim
