#pragma once

// Training-data export: every decision of an episode, augmented with K
// observations rendered at poses drawn from the filter's pose covariance.
//
// Layout under the output directory:
//   <episode>/<leg>/<k>.csv   window heights [m], one row per line
//   <episode>/<leg>/<k>.pgm   same window as a 16-bit image
//   manifest.jsonl            one line per sample

#include "gradesim/config.hpp"
#include "gradesim/observation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gradesim {

struct ManifestEntry {
  int episode = 0;
  int leg = 0;
  int k = 0;
  std::string csv;  // relative to the dataset root
  std::string pgm;
  PgmScale pgm_scale;
  WindowSpec window;
  Pose est_pose;
  Pose sample_pose;
  WaypointAction labels;   // body frame of sample_pose, (forward, right)
  std::string covariance_id;  // "<episode>/<leg>"; all samples of a leg share it
  Mat3 covariance = Mat3::Zero();  // x, y, yaw
};

nlohmann::json to_json(const ManifestEntry& e);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);

/// Writes the csv and pgm of every sample and appends one manifest line each.
std::vector<ManifestEntry> write_samples(const std::filesystem::path& root, int episode, int leg,
                                         const std::vector<AugmentedSample>& samples,
                                         const Mat3& covariance, std::ostream& manifest);

struct DatasetReport {
  int episodes = 0;
  int decisions = 0;
  int samples = 0;
  int failed_episodes = 0;
};

/// Runs cfg.rollouts episodes at the first noise level and exports K samples
/// per decision. Survey legs are not decisions and are not exported.
DatasetReport export_dataset(const ScenarioConfig& cfg, int k, const std::filesystem::path& out);

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
Eigen::MatrixXd read_window_csv(const std::filesystem::path& path);
void write_window_csv(const std::filesystem::path& path, const Eigen::MatrixXd& w);

}  // namespace gradesim
