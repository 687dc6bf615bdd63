#include "gradesim/harness.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/stats.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <thread>

namespace gradesim {

using nlohmann::json;

namespace {
constexpr std::uint64_t kFixedEpisodeStream = 0x45504953ULL;
}

bool ScenarioSummary::any_failed() const {
  for (const auto& l : levels)
    if (l.failed > 0) return true;
  return false;
}

bool ScenarioSummary::any_diverged() const {
  for (const auto& l : levels)
    for (const auto& r : l.rollouts)
      if (!r.failed && r.diverged) return true;
  return false;
}

std::uint64_t rollout_seed(std::uint64_t base, int index) {
  return derive_seed(base, static_cast<std::uint64_t>(index));
}

Episode episode_for_rollout(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.fixed_episode) {
    std::mt19937_64 rng(derive_seed(cfg.episode_seed, kFixedEpisodeStream));
    return spawn_episode(rng, cfg.spawn, cfg.dozer);
  }
  RolloutRng rng(seed);
  return spawn_episode(rng.episode(), cfg.spawn, cfg.dozer);
}

RolloutRecord run_rollout(const ScenarioConfig& cfg, const NoiseLevel& level, int level_index,
                          int index, const std::filesystem::path& out_dir) {
  RolloutRecord rec;
  rec.level = level_index;
  rec.index = index;
  rec.seed = rollout_seed(cfg.seed, index);
  try {
    const Episode ep = episode_for_rollout(cfg, rec.seed);
    const EpisodeConfig ecfg = cfg.episode_for(level);
    RolloutRng rng(rec.seed);
    std::unique_ptr<Policy> policy;
    if (cfg.policy == PolicyKind::kReplay) {
      policy = std::make_unique<ReplayPolicy>(ReplayPolicy::load(cfg.replay_file));
    } else {
      policy = std::make_unique<HeuristicPolicy>(cfg.heuristic, ep.map.extent(), ecfg.rules.dump_x);
    }
    const EpisodeResult r = run_episode(ep, *policy, ecfg, rng);

    rec.metrics = r.metrics;
    rec.initial_volume = r.initial_volume;
    rec.diverged = r.diverged;
    rec.termination = to_string(r.termination);
    for (const auto& leg : r.legs) {
      if (leg.kind == ActionKind::kPush && !leg.survey) rec.push_success.push_back(leg.success);
    }

    if (cfg.write_artifacts) {
      char name[64];
      std::snprintf(name, sizeof name, "rollout_%04d", index);
      const std::filesystem::path rel = std::filesystem::path(level.name) / name;
      const std::filesystem::path dir = out_dir / rel;
      std::filesystem::create_directories(dir);
      write_log_csv(dir / "trajectory.csv", r.log);
      write_heightmap_csv(dir / "map_initial.csv", ep.map);
      write_heightmap_csv(dir / "map_final.csv", r.final_map);
      write_heightmap_pgm(dir / "map_final.pgm", r.final_map);
      for (const char* f : {"trajectory.csv", "map_initial.csv", "map_final.csv", "map_final.pgm"}) {
        rec.files.push_back((rel / f).generic_string());
      }
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

void aggregate(LevelSummary& l) {
  std::vector<double> times, unc;
  l.completed = l.failed = l.push_legs = l.successes = 0;
  int diverged = 0;
  for (const auto& r : l.rollouts) {
    if (r.failed) {
      ++l.failed;
      continue;
    }
    ++l.completed;
    times.push_back(r.metrics.episode_time);
    unc.push_back(r.metrics.uncleared_volume);
    diverged += r.diverged ? 1 : 0;
    for (bool s : r.push_success) {
      ++l.push_legs;
      l.successes += s ? 1 : 0;
    }
  }
  l.time_mean = times.empty() ? 0.0 : mean(times);
  l.time_std = stddev(times);
  l.uncleared_mean = unc.empty() ? 0.0 : mean(unc);
  l.uncleared_std = stddev(unc);
  l.success_rate = l.push_legs ? static_cast<double>(l.successes) / l.push_legs : 0.0;
  l.divergence_rate = l.completed ? static_cast<double>(diverged) / l.completed : 0.0;
}

ScenarioSummary run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioSummary s;
  s.config = cfg;
  const auto levels = cfg.levels();
  const int n = cfg.rollouts;
  const int tasks = static_cast<int>(levels.size()) * n;
  std::vector<RolloutRecord> results(tasks);

  std::filesystem::create_directories(cfg.output);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < tasks; t = next++) {
      results[t] = run_rollout(cfg, levels[t / n], t / n, t % n, cfg.output);
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, tasks);
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t li = 0; li < levels.size(); ++li) {
    LevelSummary l;
    l.name = levels[li].name;
    l.yaw_deg = levels[li].yaw_deg;
    for (int i = 0; i < n; ++i) l.rollouts.push_back(std::move(results[li * n + i]));
    aggregate(l);
    s.levels.push_back(std::move(l));
  }
  write_summary(cfg.output, s);
  return s;
}

namespace {

json config_for_summary(const ScenarioConfig& c) {
  // Where results go and how many threads produce them do not change them.
  json j = to_json(c);
  j.erase("output");
  j.erase("threads");
  return j;
}

}  // namespace

json to_json(const ScenarioSummary& s) {
  json levels = json::array();
  for (const auto& l : s.levels) {
    json rolls = json::array();
    for (const auto& r : l.rollouts) {
      json flags = json::array();
      for (bool b : r.push_success) flags.push_back(b);
      rolls.push_back({{"index", r.index},
                       {"seed", r.seed},
                       {"failed", r.failed},
                       {"error", r.error},
                       {"episode_time_s", r.metrics.episode_time},
                       {"uncleared_volume_m3", r.metrics.uncleared_volume},
                       {"initial_volume_m3", r.initial_volume},
                       {"legs", r.metrics.legs},
                       {"push_success", flags},
                       {"diverged", r.diverged},
                       {"termination", r.termination},
                       {"files", r.files}});
    }
    levels.push_back({{"name", l.name},
                      {"yaw_deg", l.yaw_deg},
                      {"completed", l.completed},
                      {"failed", l.failed},
                      {"episode_time_s", {{"mean", l.time_mean}, {"std", l.time_std}}},
                      {"uncleared_volume_m3", {{"mean", l.uncleared_mean}, {"std", l.uncleared_std}}},
                      {"push_legs", l.push_legs},
                      {"successes", l.successes},
                      {"success_rate", l.success_rate},
                      {"divergence_rate", l.divergence_rate},
                      {"rollouts", rolls}});
  }
  return {{"scenario", to_string(s.config.scenario)},
          {"seed", s.config.seed},
          {"rollouts", s.config.rollouts},
          {"env", env_spec(s.config)},
          {"config", config_for_summary(s.config)},
          {"levels", levels}};
}

void write_summary(const std::filesystem::path& dir, const ScenarioSummary& s) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "summary.json");
    if (!f) throw IoError("cannot write " + (dir / "summary.json").string());
    f << to_json(s).dump(2) << '\n';
  }
  std::ofstream f(dir / "rollouts.csv");
  if (!f) throw IoError("cannot write " + (dir / "rollouts.csv").string());
  f << "level,yaw_deg,index,seed,failed,diverged,termination,episode_time_s,uncleared_volume_m3,"
       "initial_volume_m3,legs,push_legs,successes\n";
  char buf[512];
  for (const auto& l : s.levels) {
    for (const auto& r : l.rollouts) {
      int succ = 0;
      for (bool b : r.push_success) succ += b ? 1 : 0;
      std::snprintf(buf, sizeof buf, "%s,%.17g,%d,%llu,%d,%d,%s,%.17g,%.17g,%.17g,%d,%zu,%d\n",
                    l.name.c_str(), l.yaw_deg, r.index, static_cast<unsigned long long>(r.seed),
                    r.failed ? 1 : 0, r.diverged ? 1 : 0, r.termination.c_str(),
                    r.metrics.episode_time, r.metrics.uncleared_volume, r.initial_volume,
                    r.metrics.legs, r.push_success.size(), succ);
      f << buf;
    }
  }
}

namespace {

MetricDelta paired_delta(const json& la, const json& lb, const char* key) {
  std::map<std::uint64_t, double> a;
  for (const auto& r : la.at("rollouts")) {
    if (!r.at("failed").get<bool>()) a[r.at("seed").get<std::uint64_t>()] = r.at(key).get<double>();
  }
  MetricDelta d;
  std::vector<double> va, vb, deltas;
  for (const auto& r : lb.at("rollouts")) {
    if (r.at("failed").get<bool>()) continue;
    const auto it = a.find(r.at("seed").get<std::uint64_t>());
    if (it == a.end()) continue;
    const double b = r.at(key).get<double>();
    va.push_back(it->second);
    vb.push_back(b);
    deltas.push_back(b - it->second);
  }
  d.pairs = static_cast<int>(deltas.size());
  if (d.pairs == 0) return d;
  d.mean_a = mean(va);
  d.mean_b = mean(vb);
  d.mean_delta = mean(deltas);
  d.relative = d.mean_a != 0.0 ? d.mean_b / d.mean_a - 1.0 : 0.0;
  const SignTest t = sign_test(deltas);
  d.positive = t.positive;
  d.negative = t.negative;
  d.ties = t.ties;
  d.p_value = t.p_value;
  return d;
}

json to_json(const MetricDelta& d) {
  return {{"pairs", d.pairs},       {"mean_a", d.mean_a},     {"mean_b", d.mean_b},
          {"mean_delta", d.mean_delta}, {"relative", d.relative}, {"positive", d.positive},
          {"negative", d.negative}, {"ties", d.ties},         {"sign_test_p", d.p_value}};
}

}  // namespace

std::vector<LevelDelta> compare_summaries(const json& a, const json& b) {
  if (a.at("env") != b.at("env")) {
    throw MismatchedEnv("compare: the two summaries were produced in different environments");
  }
  const auto& la = a.at("levels");
  const auto& lb = b.at("levels");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (la.size() == lb.size()) {
    for (std::size_t i = 0; i < la.size(); ++i) pairs.emplace_back(i, i);
  } else if (la.size() == 1) {
    for (std::size_t i = 0; i < lb.size(); ++i) pairs.emplace_back(0, i);
  } else if (lb.size() == 1) {
    for (std::size_t i = 0; i < la.size(); ++i) pairs.emplace_back(i, 0);
  } else {
    throw std::invalid_argument("compare: level counts differ and neither summary has a single level");
  }
  std::vector<LevelDelta> out;
  for (const auto& [i, j] : pairs) {
    LevelDelta d;
    d.a = la[i].at("name").get<std::string>();
    d.b = lb[j].at("name").get<std::string>();
    d.episode_time = paired_delta(la[i], lb[j], "episode_time_s");
    d.uncleared_volume = paired_delta(la[i], lb[j], "uncleared_volume_m3");
    out.push_back(d);
  }
  return out;
}

json to_json(const std::vector<LevelDelta>& ds) {
  json arr = json::array();
  for (const auto& d : ds) {
    arr.push_back({{"a", d.a},
                   {"b", d.b},
                   {"episode_time_s", to_json(d.episode_time)},
                   {"uncleared_volume_m3", to_json(d.uncleared_volume)}});
  }
  return arr;
}

}  // namespace gradesim
