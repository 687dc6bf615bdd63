#include "gradesim/config.hpp"

#include "gradesim/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

namespace gradesim {

using nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kNoiseLess: return "noise_less";
    case Scenario::kSensorFusion: return "sensor_fusion";
    case Scenario::kExtreme: return "extreme";
    case Scenario::kYawSweep: return "yaw_sweep";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::kNoiseLess, Scenario::kSensorFusion, Scenario::kExtreme,
                     Scenario::kYawSweep}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("scenario", "unknown scenario '" + name +
                                    "' (noise_less, sensor_fusion, extreme, yaw_sweep)");
}

namespace {

double cm(double v) { return v / 100.0; }
double cm3(double v) { return v / 1e6; }
double deg(double v) { return v * kDegToRad; }
Vec3 cm(const Vec3& v) { return v / 100.0; }
Vec3 deg(const Vec3& v) { return v * kDegToRad; }
json arr(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// SI value in file units, written with the fewest digits that still load
// back to exactly the same SI value.
double file_units(double si, double scale, double (*load)(double)) {
  char buf[32];
  for (int digits = 6; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, si * scale);
    const double v = std::strtod(buf, nullptr);
    if (load(v) == si) return v;
  }
  return si * scale;
}
double to_cm(double v) { return file_units(v, 100.0, cm); }
double to_cm3(double v) { return file_units(v, 1e6, cm3); }
double to_deg(double v) { return file_units(v, 1.0 / kDegToRad, deg); }
Vec3 to_cm(const Vec3& v) { return {to_cm(v.x()), to_cm(v.y()), to_cm(v.z())}; }
Vec3 to_deg(const Vec3& v) { return {to_deg(v.x()), to_deg(v.y()), to_deg(v.z())}; }

// Reads one JSON object, remembering which keys were consumed so that
// leftovers (typos) can be reported with their full path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Section sub(const std::string& key) {
    used_.insert(key);
    return Section(j_.at(key), at(key));
  }

  template <typename F>
  void with(const std::string& key, F&& f) {
    if (has(key)) {
      Section s = sub(key);
      f(s);
      s.finish();
    }
  }

  void num(const std::string& key, double& out, double (*conv)(double) = nullptr) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    out = conv ? conv(x) : x;
  }

  void integer(const std::string& key, int& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = v.get<int>();
  }

  void u64(const std::string& key, std::uint64_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(at(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = v.get<bool>();
  }

  void str(const std::string& key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    out = v.get<std::string>();
  }

  void vec3(const std::string& key, Vec3& out, Vec3 (*conv)(const Vec3&)) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(at(key), "expected an array of 3 numbers");
    Vec3 x;
    for (int a = 0; a < 3; ++a) {
      if (!v[a].is_number()) throw ConfigError(at(key) + "[" + std::to_string(a) + "]", "expected a number");
      x[a] = v[a].get<double>();
    }
    if (!x.allFinite()) throw ConfigError(at(key), "must be finite");
    out = conv(x);
  }

  void list(const std::string& key, std::vector<double>& out, double (*conv)(double) = nullptr) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
    out.clear();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) throw ConfigError(at(key) + "[" + std::to_string(k) + "]", "expected a number");
      out.push_back(conv ? conv(v[k].get<double>()) : v[k].get<double>());
    }
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(at(k), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  bool take(const std::string& key) {
    if (!has(key)) return false;
    used_.insert(key);
    return true;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

template <typename E>
E parse_enum(const std::string& path, const std::string& v,
             std::initializer_list<std::pair<const char*, E>> opts) {
  std::string names;
  for (const auto& [n, e] : opts) {
    if (v == n) return e;
    names += std::string(names.empty() ? "" : ", ") + n;
  }
  throw ConfigError(path, "unknown value '" + v + "' (" + names + ")");
}

void apply(Section& root, ScenarioConfig& c) {
  std::string ignored;
  root.str("scenario", ignored);  // already resolved
  root.integer("rollouts", c.rollouts);
  root.u64("seed", c.seed);
  root.boolean("fixed_episode", c.fixed_episode);
  root.u64("episode_seed", c.episode_seed);
  root.integer("threads", c.threads);
  root.boolean("write_artifacts", c.write_artifacts);
  if (root.has("output")) {
    std::string out;
    root.str("output", out);
    c.output = out;
  }

  root.with("noise", [&](Section& n) {
    n.with("imu", [&](Section& s) {
      s.vec3("accel_bias_cm_s2", c.noise.b_c, cm);
      s.vec3("gyro_bias_deg_s", c.noise.d_c, deg);
      s.vec3("accel_rw_cm_s_sqrt_s", c.noise.a_rw, cm);
      s.vec3("gyro_rw_deg_sqrt_s", c.noise.g_rw, deg);
    });
    n.with("ic", [&](Section& s) {
      s.vec3("position_cm", c.noise.dp_ic, cm);
      s.vec3("velocity_cm_s", c.noise.dv_ic, cm);
      s.vec3("attitude_deg", c.noise.dpsi_ic, deg);
    });
    n.with("aiding", [&](Section& s) {
      s.vec3("position_cm", c.noise.dp_err, cm);
      s.vec3("attitude_deg", c.noise.dpsi_err, deg);
      if (s.has("mode")) {
        std::string m;
        s.str("mode", m);
        c.noise.aiding_mode = parse_enum<AidingNoiseMode>(
            s.at("mode"), m, {{"gaussian", AidingNoiseMode::kGaussian},
                              {"fixed_offset", AidingNoiseMode::kFixedOffset}});
      }
    });
  });

  root.with("filter", [&](Section& s) {
    if (s.has("r_mode")) {
      std::string m;
      s.str("r_mode", m);
      c.filter.r_mode =
          parse_enum<RMode>(s.at("r_mode"), m, {{"matched", RMode::kMatched}, {"fixed", RMode::kFixed}});
    }
    s.vec3("fixed_position_cm", c.filter.fixed_r_pos, cm);
    s.vec3("fixed_attitude_deg", c.filter.fixed_r_att, deg);
    s.num("r_floor", c.filter.r_floor);
    s.num("q_position_m2_s", c.filter.q_pos);
    s.num("q_velocity_m2_s3", c.filter.q_vel);
    s.num("q_attitude_rad2_s", c.filter.q_att);
    s.num("q_bias", c.filter.q_bias);
    s.boolean("couple_position_into_velocity", c.filter.options.couple_position_into_velocity);
    s.boolean("gravity_in_velocity_skew", c.filter.options.gravity_in_velocity_skew);
    s.num("gravity_m_s2", c.filter.options.g);
  });

  root.with("sweep", [&](Section& s) { s.list("yaw_deg", c.sweep_yaw_deg); });

  root.with("env", [&](Section& e) {
    e.with("map", [&](Section& s) {
      s.integer("width_cells", c.spawn.width);
      s.integer("height_cells", c.spawn.height);
      s.num("cell_size_cm", c.spawn.cell_size, cm);
      s.num("target_height_cm", c.spawn.target_h, cm);
    });
    e.with("piles", [&](Section& s) {
      s.integer("count_min", c.spawn.piles_min);
      s.integer("count_max", c.spawn.piles_max);
      s.num("volume_cm3_min", c.spawn.volume_min, cm3);
      s.num("volume_cm3_max", c.spawn.volume_max, cm3);
      s.num("sigma_cm_min", c.spawn.sigma_min, cm);
      s.num("sigma_cm_max", c.spawn.sigma_max, cm);
      s.num("x_min_cm", c.spawn.pile_x_min, cm);
      s.num("x_max_cm", c.spawn.pile_x_max, cm);
      s.num("border_cm", c.spawn.border, cm);
      s.integer("max_retries", c.spawn.max_retries);
    });
    e.with("dozer", [&](Section& s) {
      s.num("blade_width_cm", c.dozer.blade_width, cm);
      s.num("blade_capacity_cm3", c.dozer.blade_capacity, cm3);
      s.num("speed_cm_s", c.dozer.speed, cm);
      s.num("spawn_x_cm", c.spawn.spawn_x, cm);
    });
    e.with("rules", [&](Section& s) {
      s.num("dump_x_cm", c.episode.rules.dump_x, cm);
      s.num("deposit_depth_cm", c.episode.rules.deposit_depth, cm);
    });
    e.with("window", [&](Section& s) {
      s.integer("rows", c.episode.window.rows);
      s.integer("cols", c.episode.window.cols);
      s.num("cm_per_px", c.episode.window.m_per_px, cm);
      s.num("forward_offset_cm", c.episode.window.forward_offset, cm);
    });
    e.with("timing", [&](Section& s) {
      s.num("imu_rate_hz", c.episode.imu_rate);
      s.num("aid_rate_hz", c.episode.aid_rate);
      s.num("max_time_s", c.episode.max_time);
      s.num("clear_fraction", c.episode.clear_fraction);
      s.integer("log_every_steps", c.episode.log_every);
    });
    e.with("survey", [&](Section& s) {
      s.list("x_cm", c.episode.survey_xs, cm);
      s.list("lanes_cm", c.episode.survey_lanes, cm);
      s.boolean("stop_after_lanes", c.episode.stop_after_survey);
    });
  });

  root.with("policy", [&](Section& s) {
    if (s.has("type")) {
      std::string t;
      s.str("type", t);
      c.policy = parse_enum<PolicyKind>(s.at("type"), t,
                                        {{"heuristic", PolicyKind::kHeuristic}, {"replay", PolicyKind::kReplay}});
    }
    if (s.has("replay_file")) {
      std::string f;
      s.str("replay_file", f);
      c.replay_file = f;
    }
    s.num("threshold_cm", c.heuristic.threshold, cm);
    s.num("max_push_angle_deg", c.heuristic.max_push_angle, deg);
    s.num("clearance_cm", c.heuristic.clearance, cm);
    s.num("reverse_dist_cm", c.heuristic.reverse_dist, cm);
    s.num("back_off_cm", c.heuristic.back_off, cm);
    s.boolean("extend_to_dump", c.heuristic.extend_to_dump);
    s.num("dump_margin_cm", c.heuristic.dump_margin, cm);
    s.num("edge_margin_cm", c.heuristic.edge_margin, cm);
    s.num("dump_edge_margin_cm", c.heuristic.dump_edge_margin, cm);
  });

  root.with("follower", [&](Section& s) {
    double capture_cells = c.follower_capture_cells;
    s.num("gain", c.episode.follower.gain);
    s.num("max_turn_rate_deg_s", c.episode.follower.max_turn_rate, deg);
    s.num("capture_radius_cells", capture_cells);
    c.follower_capture_cells = capture_cells;
    s.num("slow_radius_cm", c.episode.follower.slow_radius, cm);
    s.num("slow_turn_angle_deg", c.episode.follower.slow_turn_angle, deg);
    s.num("pass_radius_cm", c.episode.follower.pass_radius, cm);
    s.num("budget_factor", c.episode.leg_budget_factor);
    s.num("budget_slack_s", c.episode.leg_budget_slack);
  });

  root.with("dataset", [&](Section& s) {
    s.integer("k", c.dataset_k);
    s.num("scale_std", c.augment.scale_std);
    s.integer("max_redraws", c.augment.max_redraws);
  });
}

}  // namespace

std::vector<NoiseLevel> ScenarioConfig::levels() const {
  std::vector<NoiseLevel> out;
  if (scenario == Scenario::kYawSweep) {
    for (double y : sweep_yaw_deg) {
      NoiseLevel l;
      char buf[32];
      std::snprintf(buf, sizeof buf, "yaw_%g", y);
      l.name = buf;
      l.yaw_deg = y;
      l.noise = noise;
      l.noise.dpsi_err.z() = deg(y);
      out.push_back(l);
    }
  } else {
    NoiseLevel l;
    l.name = to_string(scenario);
    l.yaw_deg = noise.dpsi_err.z() / kDegToRad;
    l.noise = noise;
    out.push_back(l);
  }
  return out;
}

FilterTuning ScenarioConfig::tuning_for(const NoiseConfig& n) const {
  FilterTuning t = FilterTuning::matched(n);
  if (filter.r_mode == RMode::kFixed) {
    t.r_pos = filter.fixed_r_pos;
    t.r_att = filter.fixed_r_att;
  }
  t.r_floor = filter.r_floor;
  t.q_pos = filter.q_pos;
  t.q_vel = filter.q_vel;
  t.q_att = filter.q_att;
  t.q_bias = filter.q_bias;
  t.options = filter.options;
  return t;
}

EpisodeConfig ScenarioConfig::episode_for(const NoiseLevel& level) const {
  EpisodeConfig e = episode;
  e.noise = level.noise;
  e.tuning = tuning_for(level.noise);
  e.follower.speed = dozer.speed;
  e.follower.capture_radius = follower_capture_cells * spawn.cell_size;
  return e;
}

void ScenarioConfig::validate() const {
  auto req = [](bool ok, const char* path, const char* what) {
    if (!ok) throw ConfigError(path, what);
  };
  req(rollouts >= 1, "rollouts", "must be >= 1");
  req(threads >= 0, "threads", "must be >= 0");
  try {
    noise.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("noise", e.what());
  }
  req(filter.r_floor > 0.0, "filter.r_floor", "must be > 0");
  req(filter.q_pos >= 0.0, "filter.q_position_m2_s", "must be >= 0");
  req(filter.q_vel >= 0.0, "filter.q_velocity_m2_s3", "must be >= 0");
  req(filter.q_att >= 0.0, "filter.q_attitude_rad2_s", "must be >= 0");
  req(filter.q_bias >= 0.0, "filter.q_bias", "must be >= 0");
  req((filter.fixed_r_pos.array() >= 0.0).all(), "filter.fixed_position_cm", "must be >= 0");
  req((filter.fixed_r_att.array() >= 0.0).all(), "filter.fixed_attitude_deg", "must be >= 0");
  if (scenario == Scenario::kYawSweep) {
    req(!sweep_yaw_deg.empty(), "sweep.yaw_deg", "must list at least one level");
    for (double y : sweep_yaw_deg) req(y >= 0.0, "sweep.yaw_deg", "levels must be >= 0");
  }

  req(spawn.width > 0, "env.map.width_cells", "must be > 0");
  req(spawn.height > 0, "env.map.height_cells", "must be > 0");
  req(spawn.cell_size > 0.0, "env.map.cell_size_cm", "must be > 0");
  req(spawn.target_h >= 0.0, "env.map.target_height_cm", "must be >= 0");
  req(spawn.piles_min >= 0, "env.piles.count_min", "must be >= 0");
  req(spawn.piles_max >= spawn.piles_min, "env.piles.count_max", "must be >= count_min");
  req(spawn.volume_min > 0.0, "env.piles.volume_cm3_min", "must be > 0");
  req(spawn.volume_max >= spawn.volume_min, "env.piles.volume_cm3_max", "must be >= volume_cm3_min");
  req(spawn.sigma_min > 0.0, "env.piles.sigma_cm_min", "must be > 0");
  req(spawn.sigma_max >= spawn.sigma_min, "env.piles.sigma_cm_max", "must be >= sigma_cm_min");
  req(spawn.pile_x_max >= spawn.pile_x_min, "env.piles.x_max_cm", "must be >= x_min_cm");
  req(spawn.max_retries >= 1, "env.piles.max_retries", "must be >= 1");
  const double ex = spawn.width * spawn.cell_size, ey = spawn.height * spawn.cell_size;
  req(spawn.spawn_x > 0.0 && spawn.spawn_x < ex, "env.dozer.spawn_x_cm", "must lie inside the map");
  req(dozer.blade_width >= 2.0 * spawn.cell_size, "env.dozer.blade_width_cm", "must be >= 2 cells");
  req(dozer.blade_capacity > 0.0, "env.dozer.blade_capacity_cm3", "must be > 0");
  req(dozer.speed > 0.0, "env.dozer.speed_cm_s", "must be > 0");
  req(episode.rules.dump_x > 0.0 && episode.rules.dump_x < ex, "env.rules.dump_x_cm", "must lie inside the map");
  req(episode.rules.deposit_depth > 0.0, "env.rules.deposit_depth_cm", "must be > 0");
  req(episode.window.rows >= 1, "env.window.rows", "must be >= 1");
  req(episode.window.cols >= 1, "env.window.cols", "must be >= 1");
  req(episode.window.m_per_px > 0.0, "env.window.cm_per_px", "must be > 0");
  req(episode.imu_rate >= 1.0, "env.timing.imu_rate_hz", "must be >= 1");
  req(episode.aid_rate > 0.0 && episode.aid_rate <= episode.imu_rate, "env.timing.aid_rate_hz",
      "must be in (0, imu_rate_hz]");
  const double ratio = episode.imu_rate / episode.aid_rate;
  req(std::abs(ratio - std::round(ratio)) < 1e-9, "env.timing.aid_rate_hz", "must divide imu_rate_hz");
  req(dozer.speed / episode.imu_rate <= spawn.cell_size, "env.dozer.speed_cm_s",
      "must not exceed one cell per IMU step");
  req(episode.max_time > 0.0, "env.timing.max_time_s", "must be > 0");
  req(episode.clear_fraction >= 0.0 && episode.clear_fraction < 1.0, "env.timing.clear_fraction",
      "must be in [0, 1)");
  req(episode.log_every >= 0, "env.timing.log_every_steps", "must be >= 0");
  for (double y : episode.survey_lanes) req(y > 0.0 && y < ey, "env.survey.lanes_cm", "lanes must lie inside the map");
  for (double x : episode.survey_xs) req(x > 0.0 && x + 0.15 < ex, "env.survey.x_cm", "stations must lie inside the map");

  req(policy != PolicyKind::kReplay || !replay_file.empty(), "policy.replay_file",
      "required when policy.type is replay");
  req(heuristic.threshold > 0.0, "policy.threshold_cm", "must be > 0");
  req(heuristic.max_push_angle > 0.0, "policy.max_push_angle_deg", "must be > 0");
  req(heuristic.edge_margin >= 0.0 && 2.0 * heuristic.edge_margin < std::min(ex, ey),
      "policy.edge_margin_cm", "must leave room inside the map");
  req(heuristic.dump_edge_margin >= 0.0 && heuristic.dump_edge_margin < ex - heuristic.edge_margin,
      "policy.dump_edge_margin_cm", "must leave room inside the map");
  req(episode.follower.gain > 0.0, "follower.gain", "must be > 0");
  req(episode.follower.max_turn_rate > 0.0, "follower.max_turn_rate_deg_s", "must be > 0");
  req(follower_capture_cells > 0.0, "follower.capture_radius_cells", "must be > 0");
  req(episode.follower.pass_radius >= 0.0, "follower.pass_radius_cm", "must be >= 0");
  req(episode.leg_budget_factor > 0.0, "follower.budget_factor", "must be > 0");
  req(dataset_k >= 1, "dataset.k", "must be >= 1");
  req(augment.scale_std >= 0.0, "dataset.scale_std", "must be >= 0");
  req(augment.max_redraws >= 0, "dataset.max_redraws", "must be >= 0");
}

ScenarioConfig preset(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  c.filter.fixed_r_pos = cm(Vec3(5, 5, 5));
  c.filter.fixed_r_att = deg(Vec3(1, 1, 5));
  if (s == Scenario::kNoiseLess) return c;

  NoiseConfig& n = c.noise;
  // Inertial sensor grade of a small MEMS unit.
  n.b_c = cm(Vec3(2, 2, 2));
  n.d_c = deg(Vec3(0.05, 0.05, 0.05));
  n.a_rw = cm(Vec3(0.5, 0.5, 0.5));
  n.g_rw = deg(Vec3(0.05, 0.05, 0.05));
  n.dp_ic = cm(Vec3(5, 5, 5));
  n.dv_ic = cm(Vec3(1, 1, 1));
  n.dpsi_ic = deg(Vec3(4, 4, 5));
  n.dp_err = cm(Vec3(5, 5, 5));
  n.dpsi_err = deg(Vec3(1, 1, 5));
  if (s == Scenario::kExtreme) {
    n.dp_err = cm(Vec3(8, 8, 8));
    n.dpsi_err = deg(Vec3(1, 1, 10));
  }
  if (s == Scenario::kYawSweep) {
    c.sweep_yaw_deg = {0, 10, 20, 30, 40, 50};
    c.rollouts = 20;
    // The filter keeps the sensor-fusion R whatever the injected yaw noise.
    c.filter.r_mode = RMode::kFixed;
  }
  return c;
}

ScenarioConfig parse_config(const json& j, const CliOverrides& o) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  std::string name = "sensor_fusion";
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string()) throw ConfigError("scenario", "expected a string");
    name = j.at("scenario").get<std::string>();
  }
  if (o.scenario) name = *o.scenario;
  ScenarioConfig c = preset(parse_scenario(name));

  Section root(j, "");
  apply(root, c);
  root.finish();

  if (o.rollouts) c.rollouts = *o.rollouts;
  if (o.seed) c.seed = *o.seed;
  if (o.output) c.output = *o.output;
  c.heuristic.target_h = c.spawn.target_h;
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path, const CliOverrides& o) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(f, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", path.string() + ": " + e.what());
  }
  ScenarioConfig c = parse_config(j, o);
  if (c.policy == PolicyKind::kReplay && c.replay_file.is_relative()) {
    c.replay_file = path.parent_path() / c.replay_file;
  }
  return c;
}

namespace {

json env_json(const ScenarioConfig& c) {
  const auto& e = c.episode;
  json lanes = json::array();
  for (double y : e.survey_lanes) lanes.push_back(to_cm(y));
  json xs = json::array();
  for (double x : e.survey_xs) xs.push_back(to_cm(x));
  return {
      {"map",
       {{"width_cells", c.spawn.width},
        {"height_cells", c.spawn.height},
        {"cell_size_cm", to_cm(c.spawn.cell_size)},
        {"target_height_cm", to_cm(c.spawn.target_h)}}},
      {"piles",
       {{"count_min", c.spawn.piles_min},
        {"count_max", c.spawn.piles_max},
        {"volume_cm3_min", to_cm3(c.spawn.volume_min)},
        {"volume_cm3_max", to_cm3(c.spawn.volume_max)},
        {"sigma_cm_min", to_cm(c.spawn.sigma_min)},
        {"sigma_cm_max", to_cm(c.spawn.sigma_max)},
        {"x_min_cm", to_cm(c.spawn.pile_x_min)},
        {"x_max_cm", to_cm(c.spawn.pile_x_max)},
        {"border_cm", to_cm(c.spawn.border)},
        {"max_retries", c.spawn.max_retries}}},
      {"dozer",
       {{"blade_width_cm", to_cm(c.dozer.blade_width)},
        {"blade_capacity_cm3", to_cm3(c.dozer.blade_capacity)},
        {"speed_cm_s", to_cm(c.dozer.speed)},
        {"spawn_x_cm", to_cm(c.spawn.spawn_x)}}},
      {"rules",
       {{"dump_x_cm", to_cm(e.rules.dump_x)}, {"deposit_depth_cm", to_cm(e.rules.deposit_depth)}}},
      {"window",
       {{"rows", e.window.rows},
        {"cols", e.window.cols},
        {"cm_per_px", to_cm(e.window.m_per_px)},
        {"forward_offset_cm", to_cm(e.window.forward_offset)}}},
      {"timing",
       {{"imu_rate_hz", e.imu_rate},
        {"aid_rate_hz", e.aid_rate},
        {"max_time_s", e.max_time},
        {"clear_fraction", e.clear_fraction},
        {"log_every_steps", e.log_every}}},
      {"survey",
       {{"x_cm", xs},
        {"lanes_cm", lanes},
        {"stop_after_lanes", e.stop_after_survey}}},
  };
}

}  // namespace

json env_spec(const ScenarioConfig& c) {
  json j = env_json(c);
  j["fixed_episode"] = c.fixed_episode;
  j["episode_seed"] = c.episode_seed;
  return j;
}

json to_json(const ScenarioConfig& c) {
  const auto& n = c.noise;
  const auto& f = c.filter;
  const auto& h = c.heuristic;
  const auto& fp = c.episode.follower;
  json j = {
      {"scenario", to_string(c.scenario)},
      {"rollouts", c.rollouts},
      {"seed", c.seed},
      {"fixed_episode", c.fixed_episode},
      {"episode_seed", c.episode_seed},
      {"threads", c.threads},
      {"output", c.output.string()},
      {"write_artifacts", c.write_artifacts},
      {"noise",
       {{"imu",
         {{"accel_bias_cm_s2", arr(to_cm(n.b_c))},
          {"gyro_bias_deg_s", arr(to_deg(n.d_c))},
          {"accel_rw_cm_s_sqrt_s", arr(to_cm(n.a_rw))},
          {"gyro_rw_deg_sqrt_s", arr(to_deg(n.g_rw))}}},
        {"ic",
         {{"position_cm", arr(to_cm(n.dp_ic))},
          {"velocity_cm_s", arr(to_cm(n.dv_ic))},
          {"attitude_deg", arr(to_deg(n.dpsi_ic))}}},
        {"aiding",
         {{"position_cm", arr(to_cm(n.dp_err))},
          {"attitude_deg", arr(to_deg(n.dpsi_err))},
          {"mode", n.aiding_mode == AidingNoiseMode::kGaussian ? "gaussian" : "fixed_offset"}}}}},
      {"filter",
       {{"r_mode", f.r_mode == RMode::kMatched ? "matched" : "fixed"},
        {"fixed_position_cm", arr(to_cm(f.fixed_r_pos))},
        {"fixed_attitude_deg", arr(to_deg(f.fixed_r_att))},
        {"r_floor", f.r_floor},
        {"q_position_m2_s", f.q_pos},
        {"q_velocity_m2_s3", f.q_vel},
        {"q_attitude_rad2_s", f.q_att},
        {"q_bias", f.q_bias},
        {"couple_position_into_velocity", f.options.couple_position_into_velocity},
        {"gravity_in_velocity_skew", f.options.gravity_in_velocity_skew},
        {"gravity_m_s2", f.options.g}}},
      {"sweep", {{"yaw_deg", c.sweep_yaw_deg}}},
      {"env", env_json(c)},
      {"policy",
       {{"type", c.policy == PolicyKind::kHeuristic ? "heuristic" : "replay"},
        {"replay_file", c.replay_file.string()},
        {"threshold_cm", to_cm(h.threshold)},
        {"max_push_angle_deg", to_deg(h.max_push_angle)},
        {"clearance_cm", to_cm(h.clearance)},
        {"reverse_dist_cm", to_cm(h.reverse_dist)},
        {"back_off_cm", to_cm(h.back_off)},
        {"extend_to_dump", h.extend_to_dump},
        {"dump_margin_cm", to_cm(h.dump_margin)},
        {"edge_margin_cm", to_cm(h.edge_margin)},
        {"dump_edge_margin_cm", to_cm(h.dump_edge_margin)}}},
      {"follower",
       {{"gain", fp.gain},
        {"max_turn_rate_deg_s", to_deg(fp.max_turn_rate)},
        {"capture_radius_cells", c.follower_capture_cells},
        {"slow_radius_cm", to_cm(fp.slow_radius)},
        {"slow_turn_angle_deg", to_deg(fp.slow_turn_angle)},
        {"pass_radius_cm", to_cm(fp.pass_radius)},
        {"budget_factor", c.episode.leg_budget_factor},
        {"budget_slack_s", c.episode.leg_budget_slack}}},
      {"dataset",
       {{"k", c.dataset_k}, {"scale_std", c.augment.scale_std}, {"max_redraws", c.augment.max_redraws}}},
  };
  return j;
}

}  // namespace gradesim
