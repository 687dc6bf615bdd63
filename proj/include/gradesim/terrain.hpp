#pragma once

// Heightmap sandbox and a kinematic dozer with a sweep/capacity/spill blade
// model. Cell (ix, iy) covers [ix c, (ix+1) c) x [iy c, (iy+1) c) in the
// navigation x-y plane; heights are stored row-major by iy.

#include "gradesim/geometry.hpp"

#include <filesystem>
#include <random>
#include <vector>

namespace gradesim {

struct Heightmap {
  double cell_size = 0.025;  // m
  int width = 100;           // cells along x
  int height = 100;          // cells along y
  double target_h = 0.0;     // m
  std::vector<double> h;     // width * height heights [m]

  static Heightmap flat(int width, int height, double cell_size, double target_h = 0.0);

  double& at(int ix, int iy) { return h[static_cast<std::size_t>(iy) * width + ix]; }
  double at(int ix, int iy) const { return h[static_cast<std::size_t>(iy) * width + ix]; }
  bool contains(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width && iy < height; }
  bool contains(const Vec2& p) const;
  Vec2 cell_center(int ix, int iy) const { return {(ix + 0.5) * cell_size, (iy + 0.5) * cell_size}; }
  Vec2 extent() const { return {width * cell_size, height * cell_size}; }

  /// Sum of h * cell_size^2, sand at and below target included.
  double total_volume() const;
  void validate() const;
};

struct DozerBody {
  Pose pose;                      // blade center; only x, y and yaw are used
  double blade_width = 0.48;      // m
  double blade_capacity = 0.004;  // m^3
  double blade_load = 0.0;        // m^3
  double speed = 0.35;            // m/s
};

/// Rules of the sandbox that are not geometry: where sand leaves the map and
/// how a load is put down at the end of a push.
struct TerrainRules {
  double dump_x = 2.3;         // sand at or past this x leaves the map
  double deposit_depth = 0.1;  // m, length of the patch a load is spread over
};

struct GradeMetrics {
  double episode_time = 0.0;      // s
  double uncleared_volume = 0.0;  // m^3
  int legs = 0;
};

struct PileSpec {
  Vec2 center = Vec2::Zero();
  double volume = 0.0;  // m^3
  double sigma = 0.0;   // m
};

/// Adds V/(2 pi s^2) exp(-r^2 / 2 s^2) sampled at cell centers, truncated at
/// 4 sigma and clipped by the map edge.
void add_gaussian_pile(Heightmap& hm, const PileSpec& pile);

struct SpawnSpec {
  int width = 100;
  int height = 100;
  double cell_size = 0.025;
  double target_h = 0.0;
  int piles_min = 1;
  int piles_max = 3;
  double volume_min = 0.0025;  // m^3
  double volume_max = 0.004;
  double sigma_min = 0.06;  // m
  double sigma_max = 0.09;
  double pile_x_min = 0.6;  // pile centers are drawn in [pile_x_min, pile_x_max]
  double pile_x_max = 1.7;
  double border = 0.3;      // keep pile centers and the dozer this far from the y edges
  double spawn_x = 0.2;     // dozer starts at this x, heading +x
  int max_retries = 1000;
};

struct Episode {
  Heightmap map;
  DozerBody dozer;
  std::vector<PileSpec> piles;
};

/// Random piles on a flat base plus a border start pose clear of every pile.
/// Throws PlacementFailure when the piles cannot be placed in max_retries.
Episode spawn_episode(std::mt19937_64& rng, const SpawnSpec& spec, const DozerBody& dozer_template);

struct SweepReport {
  double swept = 0.0;    // moved from the map into the blade
  double spilled = 0.0;  // moved sideways past the blade ends
  double dumped = 0.0;   // left the system at the dump line
};

/// Moves the blade `step` metres along its heading (negative = reverse) and
/// applies the blade model. Only forward motion sweeps: cells whose centers
/// the blade line passed in this step are cut to target height and their sand
/// loaded up to capacity; the excess goes in equal halves to the cells just
/// past each blade end. A blade center at or past the dump line empties the
/// blade, and spill landing past the line leaves the map too. With the
/// blade raised the dozer moves without touching the sand.
/// Throws OutOfBounds if the new blade center is outside the map and
/// std::invalid_argument if |step| > cell_size.
SweepReport advance_dozer(Heightmap& hm, DozerBody& d, double step, const TerrainRules& rules,
                          bool blade_down = true);

/// Puts the blade load down on the patch just ahead of the blade. The share
/// landing on cells at or past the dump line leaves the map; returns it.
double deposit_load(Heightmap& hm, DozerBody& d, const TerrainRules& rules);

double uncleared_volume(const Heightmap& hm);

/// Strictly more than half the blade capacity.
bool decision_success(double blade_load, double capacity);

/// Row-major heights, one map row (fixed iy) per line.
void write_heightmap_csv(const std::filesystem::path& path, const Heightmap& hm);
Heightmap read_heightmap_csv(const std::filesystem::path& path, double cell_size,
                             double target_h = 0.0);
/// Linear mapping of a 16-bit image: value = offset + count * scale.
struct PgmScale {
  double offset = 0.0;  // m
  double scale = 1.0;   // m per count
};

/// 16-bit binary PGM of `img` (row 0 first), scaled to the full range.
PgmScale write_pgm16(const std::filesystem::path& path, const Eigen::MatrixXd& img);
/// Counts of a 16-bit PGM written by write_pgm16, mapped back through `scale`.
Eigen::MatrixXd read_pgm16(const std::filesystem::path& path, const PgmScale& scale);

/// 16-bit binary PGM scaled to the full range, plus `<path>.json` with the
/// cell size, target height and the value -> height mapping.
void write_heightmap_pgm(const std::filesystem::path& path, const Heightmap& hm);

}  // namespace gradesim
