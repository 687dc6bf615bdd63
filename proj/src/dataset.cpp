#include "gradesim/dataset.hpp"

#include "gradesim/errors.hpp"
#include "gradesim/harness.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gradesim {

using nlohmann::json;

namespace {

json pose_json(const Pose& p) { return {{"x", p.p.x()}, {"y", p.p.y()}, {"psi", p.att.psi}}; }

Pose pose_from(const json& j) {
  Pose p;
  p.p = Vec3(j.at("x").get<double>(), j.at("y").get<double>(), 0.0);
  p.att.psi = j.at("psi").get<double>();
  return p;
}

Vec2 vec2_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

json to_json(const ManifestEntry& e) {
  json cov = json::array();
  for (int r = 0; r < 3; ++r) cov.push_back({e.covariance(r, 0), e.covariance(r, 1), e.covariance(r, 2)});
  return {{"episode", e.episode},
          {"leg", e.leg},
          {"k", e.k},
          {"csv", e.csv},
          {"pgm", e.pgm},
          {"pgm_offset_m", e.pgm_scale.offset},
          {"pgm_scale_m_per_count", e.pgm_scale.scale},
          {"window",
           {{"rows", e.window.rows},
            {"cols", e.window.cols},
            {"m_per_px", e.window.m_per_px},
            {"forward_offset_m", e.window.forward_offset}}},
          {"est_pose", pose_json(e.est_pose)},
          {"sample_pose", pose_json(e.sample_pose)},
          {"labels",
           {{"goto", {e.labels.goto_pt.x(), e.labels.goto_pt.y()}},
            {"reverse_to", {e.labels.reverse_to.x(), e.labels.reverse_to.y()}},
            {"kind", e.labels.kind == ActionKind::kPush ? "push" : "reposition"}}},
          {"covariance_id", e.covariance_id},
          {"covariance", cov}};
}

ManifestEntry manifest_entry_from_json(const json& j) {
  ManifestEntry e;
  e.episode = j.at("episode").get<int>();
  e.leg = j.at("leg").get<int>();
  e.k = j.at("k").get<int>();
  e.csv = j.at("csv").get<std::string>();
  e.pgm = j.at("pgm").get<std::string>();
  e.pgm_scale.offset = j.at("pgm_offset_m").get<double>();
  e.pgm_scale.scale = j.at("pgm_scale_m_per_count").get<double>();
  const auto& w = j.at("window");
  e.window.rows = w.at("rows").get<int>();
  e.window.cols = w.at("cols").get<int>();
  e.window.m_per_px = w.at("m_per_px").get<double>();
  e.window.forward_offset = w.at("forward_offset_m").get<double>();
  e.est_pose = pose_from(j.at("est_pose"));
  e.sample_pose = pose_from(j.at("sample_pose"));
  const auto& l = j.at("labels");
  e.labels.goto_pt = vec2_from(l.at("goto"));
  e.labels.reverse_to = vec2_from(l.at("reverse_to"));
  e.labels.kind = l.at("kind").get<std::string>() == "push" ? ActionKind::kPush : ActionKind::kReposition;
  e.covariance_id = j.at("covariance_id").get<std::string>();
  const auto& c = j.at("covariance");
  for (int r = 0; r < 3; ++r)
    for (int q = 0; q < 3; ++q) e.covariance(r, q) = c.at(r).at(q).get<double>();
  return e;
}

void write_window_csv(const std::filesystem::path& path, const Eigen::MatrixXd& w) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", w(r, c));
      if (c) f << ',';
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

Eigen::MatrixXd read_window_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged window csv: " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty window csv: " + path.string());
  Eigen::MatrixXd w(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) w(r, c) = rows[r][c];
  return w;
}

std::vector<ManifestEntry> write_samples(const std::filesystem::path& root, int episode, int leg,
                                         const std::vector<AugmentedSample>& samples,
                                         const Mat3& covariance, std::ostream& manifest) {
  const std::filesystem::path rel_dir =
      std::filesystem::path(std::to_string(episode)) / std::to_string(leg);
  std::filesystem::create_directories(root / rel_dir);
  std::vector<ManifestEntry> out;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const AugmentedSample& s = samples[k];
    ManifestEntry e;
    e.episode = episode;
    e.leg = leg;
    e.k = static_cast<int>(k);
    e.csv = (rel_dir / (std::to_string(k) + ".csv")).generic_string();
    e.pgm = (rel_dir / (std::to_string(k) + ".pgm")).generic_string();
    write_window_csv(root / e.csv, s.obs.window);
    e.pgm_scale = write_pgm16(root / e.pgm, s.obs.window);
    e.window = s.obs.spec;
    e.est_pose = s.obs.est_pose;
    e.sample_pose = s.sample_pose;
    e.labels = s.labels;
    e.covariance_id = rel_dir.generic_string();
    e.covariance = covariance;
    manifest << to_json(e).dump() << '\n';
    out.push_back(std::move(e));
  }
  if (!manifest) throw IoError("manifest write failed under " + root.string());
  return out;
}

DatasetReport export_dataset(const ScenarioConfig& cfg, int k, const std::filesystem::path& out) {
  cfg.validate();
  if (k < 1) throw ConfigError("dataset.k", "must be >= 1");
  std::filesystem::create_directories(out);
  std::ofstream manifest(out / "manifest.jsonl");
  if (!manifest) throw IoError("cannot open " + (out / "manifest.jsonl").string());

  const NoiseLevel level = cfg.levels().front();
  const EpisodeConfig ecfg = cfg.episode_for(level);
  DatasetReport rep;
  for (int i = 0; i < cfg.rollouts; ++i) {
    const std::uint64_t seed = rollout_seed(cfg.seed, i);
    RolloutRng rng(seed);
    try {
      const Episode ep = episode_for_rollout(cfg, seed);
      HeuristicPolicy policy(cfg.heuristic, ep.map.extent(), ecfg.rules.dump_x);
      auto hook = [&](const Heightmap& map, const Observation& obs, const WaypointAction& a,
                      const Mat15& P, int leg) {
        const Mat3 cov = pose_marginal(P);
        const auto samples =
            sample_observations(map, obs.est_pose, cov, k, rng.augment(), ecfg.window, a,
                                cfg.augment);
        write_samples(out, i, leg, samples, cov, manifest);
        ++rep.decisions;
        rep.samples += static_cast<int>(samples.size());
      };
      run_episode(ep, policy, ecfg, rng, hook);
      ++rep.episodes;
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      ++rep.failed_episodes;
    }
  }
  return rep;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(manifest_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gradesim
