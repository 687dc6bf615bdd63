#include "gradesim/terrain.hpp"

#include "gradesim/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gradesim {

namespace {

Vec2 heading_dir(double psi) { return {std::cos(psi), std::sin(psi)}; }
// NED: right of the heading is +90 deg in yaw.
Vec2 right_dir(double psi) { return {-std::sin(psi), std::cos(psi)}; }

struct CellIndex {
  int ix, iy;
};

CellIndex cell_of(const Heightmap& hm, const Vec2& p) {
  return {static_cast<int>(std::floor(p.x() / hm.cell_size)),
          static_cast<int>(std::floor(p.y() / hm.cell_size))};
}

// Cells whose centers can fall within `radius` of p.
void cell_range(const Heightmap& hm, const Vec2& p, double radius, int& x0, int& x1, int& y0,
                int& y1) {
  x0 = std::max(0, static_cast<int>(std::floor((p.x() - radius) / hm.cell_size)));
  y0 = std::max(0, static_cast<int>(std::floor((p.y() - radius) / hm.cell_size)));
  x1 = std::min(hm.width - 1, static_cast<int>(std::ceil((p.x() + radius) / hm.cell_size)));
  y1 = std::min(hm.height - 1, static_cast<int>(std::ceil((p.y() + radius) / hm.cell_size)));
}

}  // namespace

Heightmap Heightmap::flat(int width, int height, double cell_size, double target_h) {
  Heightmap hm;
  hm.width = width;
  hm.height = height;
  hm.cell_size = cell_size;
  hm.target_h = target_h;
  hm.h.assign(static_cast<std::size_t>(width) * height, target_h);
  hm.validate();
  return hm;
}

bool Heightmap::contains(const Vec2& p) const {
  const Vec2 e = extent();
  return p.x() >= 0.0 && p.y() >= 0.0 && p.x() <= e.x() && p.y() <= e.y();
}

double Heightmap::total_volume() const {
  double s = 0.0;
  for (double v : h) s += v;
  return s * cell_size * cell_size;
}

void Heightmap::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("Heightmap: dimensions must be > 0");
  if (!(cell_size > 0.0)) throw std::invalid_argument("Heightmap: cell_size must be > 0");
  if (h.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("Heightmap: data size does not match dimensions");
  }
  for (double v : h) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("Heightmap: heights must be finite and >= 0");
  }
}

void add_gaussian_pile(Heightmap& hm, const PileSpec& pile) {
  if (!(pile.sigma > 0.0) || !(pile.volume >= 0.0)) {
    throw std::invalid_argument("add_gaussian_pile: sigma must be > 0 and volume >= 0");
  }
  const double radius = 4.0 * pile.sigma;
  const double peak = pile.volume / (2.0 * kPi * pile.sigma * pile.sigma);
  int x0, x1, y0, y1;
  cell_range(hm, pile.center, radius, x0, x1, y0, y1);
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      const double r2 = (hm.cell_center(ix, iy) - pile.center).squaredNorm();
      if (r2 > radius * radius) continue;
      hm.at(ix, iy) += peak * std::exp(-0.5 * r2 / (pile.sigma * pile.sigma));
    }
  }
}

Episode spawn_episode(std::mt19937_64& rng, const SpawnSpec& spec, const DozerBody& dozer_template) {
  if (spec.piles_min < 0 || spec.piles_max < spec.piles_min) {
    throw std::invalid_argument("spawn_episode: invalid pile count range");
  }
  Episode ep;
  ep.map = Heightmap::flat(spec.width, spec.height, spec.cell_size, spec.target_h);
  const double y_max = ep.map.extent().y() - spec.border;

  std::uniform_int_distribution<int> count_dist(spec.piles_min, spec.piles_max);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int count = count_dist(rng);

  for (int k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
      PileSpec p;
      p.center.x() = spec.pile_x_min + u01(rng) * (spec.pile_x_max - spec.pile_x_min);
      p.center.y() = spec.border + u01(rng) * (y_max - spec.border);
      p.volume = spec.volume_min + u01(rng) * (spec.volume_max - spec.volume_min);
      p.sigma = spec.sigma_min + u01(rng) * (spec.sigma_max - spec.sigma_min);
      placed = std::all_of(ep.piles.begin(), ep.piles.end(), [&](const PileSpec& o) {
        return (o.center - p.center).norm() > 2.0 * (o.sigma + p.sigma);
      });
      if (placed) ep.piles.push_back(p);
    }
    if (!placed) {
      throw PlacementFailure("spawn_episode: could not place pile " + std::to_string(k) + " in " +
                             std::to_string(spec.max_retries) + " attempts");
    }
  }
  for (const auto& p : ep.piles) add_gaussian_pile(ep.map, p);

  ep.dozer = dozer_template;
  ep.dozer.blade_load = 0.0;
  bool clear = false;
  for (int attempt = 0; attempt < spec.max_retries && !clear; ++attempt) {
    const double y = spec.border + u01(rng) * (y_max - spec.border);
    const Vec2 start(spec.spawn_x, y);
    clear = std::all_of(ep.piles.begin(), ep.piles.end(), [&](const PileSpec& p) {
      return (p.center - start).norm() > 4.0 * p.sigma + 0.5 * ep.dozer.blade_width;
    });
    if (clear) {
      ep.dozer.pose = Pose{};
      ep.dozer.pose.p = Vec3(start.x(), start.y(), 0.0);
    }
  }
  if (!clear) throw PlacementFailure("spawn_episode: no clear start pose for the dozer");
  return ep;
}

SweepReport advance_dozer(Heightmap& hm, DozerBody& d, double step, const TerrainRules& rules,
                          bool blade_down) {
  if (std::abs(step) > hm.cell_size) {
    throw std::invalid_argument("advance_dozer: |step| exceeds the cell size");
  }
  const double psi = d.pose.att.psi;
  const Vec2 fwd = heading_dir(psi);
  const Vec2 right = right_dir(psi);
  const Vec2 next = d.pose.p.head<2>() + step * fwd;
  if (!hm.contains(next)) {
    throw OutOfBounds("advance_dozer: blade center (" + std::to_string(next.x()) + ", " +
                      std::to_string(next.y()) + ") outside the map");
  }
  d.pose.p.head<2>() = next;

  SweepReport rep;
  const double area = hm.cell_size * hm.cell_size;
  if (step > 0.0 && blade_down) {
    const double half = 0.5 * d.blade_width;
    int x0, x1, y0, y1;
    cell_range(hm, next, half + step + hm.cell_size, x0, x1, y0, y1);
    double overflow = 0.0;
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        const Vec2 rel = hm.cell_center(ix, iy) - next;
        const double s = rel.dot(fwd);
        if (!(s > -step && s <= 0.0) || std::abs(rel.dot(right)) > half) continue;
        double& cell = hm.at(ix, iy);
        const double excess = cell - hm.target_h;
        if (excess <= 0.0) continue;
        const double vol = excess * area;
        const double room = d.blade_capacity - d.blade_load;
        cell = hm.target_h;
        if (vol <= room) {
          d.blade_load += vol;
          rep.swept += vol;
        } else {
          d.blade_load = d.blade_capacity;
          rep.swept += room;
          overflow += vol - room;
        }
      }
    }
    if (overflow > 0.0) {
      // Windrows just past each blade end; a side off the map sends its half
      // to the other side, or back under the blade if both are off.
      const double off = half + 0.5 * hm.cell_size;
      std::vector<CellIndex> sides;
      for (double sign : {-1.0, 1.0}) {
        const CellIndex c = cell_of(hm, next + sign * off * right);
        if (hm.contains(c.ix, c.iy)) sides.push_back(c);
      }
      if (sides.empty()) sides.push_back(cell_of(hm, next));
      for (const auto& c : sides) {
        const double v = overflow / sides.size();
        if (hm.cell_center(c.ix, c.iy).x() >= rules.dump_x) {
          rep.dumped += v;  // spilled past the dump line
        } else {
          hm.at(c.ix, c.iy) += v / area;
        }
      }
      rep.spilled = overflow;
    }
  }
  if (next.x() >= rules.dump_x && d.blade_load > 0.0) {
    rep.dumped += d.blade_load;
    d.blade_load = 0.0;
  }
  return rep;
}

double deposit_load(Heightmap& hm, DozerBody& d, const TerrainRules& rules) {
  if (d.blade_load <= 0.0) return 0.0;
  const double psi = d.pose.att.psi;
  const Vec2 fwd = heading_dir(psi);
  const Vec2 right = right_dir(psi);
  const Vec2 center = d.pose.p.head<2>();
  const double half = 0.5 * d.blade_width;

  std::vector<CellIndex> cells;
  int x0, x1, y0, y1;
  cell_range(hm, center, half + rules.deposit_depth + hm.cell_size, x0, x1, y0, y1);
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      const Vec2 rel = hm.cell_center(ix, iy) - center;
      const double s = rel.dot(fwd);
      if (s > 0.0 && s <= rules.deposit_depth && std::abs(rel.dot(right)) <= half) {
        cells.push_back({ix, iy});
      }
    }
  }
  if (cells.empty()) {
    const CellIndex c = cell_of(hm, center);
    cells.push_back({std::clamp(c.ix, 0, hm.width - 1), std::clamp(c.iy, 0, hm.height - 1)});
  }
  const double share = d.blade_load / cells.size();
  double dumped = 0.0;
  for (const auto& c : cells) {
    if (hm.cell_center(c.ix, c.iy).x() >= rules.dump_x) {
      dumped += share;
    } else {
      hm.at(c.ix, c.iy) += share / (hm.cell_size * hm.cell_size);
    }
  }
  d.blade_load = 0.0;
  return dumped;
}

double uncleared_volume(const Heightmap& hm) {
  double s = 0.0;
  for (double v : hm.h) s += std::max(v - hm.target_h, 0.0);
  return s * hm.cell_size * hm.cell_size;
}

bool decision_success(double blade_load, double capacity) {
  if (!(capacity > 0.0) || blade_load < 0.0) {
    throw std::invalid_argument("decision_success: need capacity > 0 and load >= 0");
  }
  return blade_load > 0.5 * capacity;
}

void write_heightmap_csv(const std::filesystem::path& path, const Heightmap& hm) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (int iy = 0; iy < hm.height; ++iy) {
    for (int ix = 0; ix < hm.width; ++ix) {
      std::snprintf(buf, sizeof buf, ix == 0 ? "%.17g" : ",%.17g", hm.at(ix, iy));
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw IoError("write failed: " + path.string());
}

Heightmap read_heightmap_csv(const std::filesystem::path& path, double cell_size, double target_h) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  Heightmap hm;
  hm.cell_size = cell_size;
  hm.target_h = target_h;
  hm.width = -1;
  hm.height = 0;
  std::string line, cell;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int n = 0;
    while (std::getline(ss, cell, ',')) {
      hm.h.push_back(std::stod(cell));
      ++n;
    }
    if (hm.width >= 0 && n != hm.width) throw IoError("ragged row in " + path.string());
    hm.width = n;
    ++hm.height;
  }
  hm.validate();
  return hm;
}

PgmScale write_pgm16(const std::filesystem::path& path, const Eigen::MatrixXd& img) {
  PgmScale ps;
  ps.offset = img.size() ? img.minCoeff() : 0.0;
  const double range = img.size() ? img.maxCoeff() - ps.offset : 0.0;
  ps.scale = range > 0.0 ? range / 65535.0 : 1.0;

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << "P5\n" << img.cols() << ' ' << img.rows() << "\n65535\n";
  for (Eigen::Index r = 0; r < img.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const auto v = static_cast<unsigned>(std::lround((img(r, c) - ps.offset) / ps.scale));
      const char be[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
      f.write(be, 2);
    }
  }
  if (!f) throw IoError("write failed: " + path.string());
  return ps;
}

Eigen::MatrixXd read_pgm16(const std::filesystem::path& path, const PgmScale& scale) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string magic;
  int cols = 0, rows = 0, maxval = 0;
  f >> magic >> cols >> rows >> maxval;
  f.get();
  if (magic != "P5" || cols <= 0 || rows <= 0 || maxval != 65535) {
    throw IoError("not a 16-bit binary PGM: " + path.string());
  }
  Eigen::MatrixXd img(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      unsigned char be[2];
      if (!f.read(reinterpret_cast<char*>(be), 2)) throw IoError("truncated PGM: " + path.string());
      img(r, c) = scale.offset + ((be[0] << 8) | be[1]) * scale.scale;
    }
  }
  return img;
}

void write_heightmap_pgm(const std::filesystem::path& path, const Heightmap& hm) {
  // Row iy of the map is image row iy.
  const Eigen::MatrixXd img = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                              Eigen::RowMajor>>(hm.h.data(), hm.height,
                                                                                hm.width);
  const PgmScale ps = write_pgm16(path, img);
  nlohmann::json meta = {{"cell_size_m", hm.cell_size}, {"width", hm.width},
                         {"height", hm.height},         {"target_h_m", hm.target_h},
                         {"offset_m", ps.offset},       {"scale_m_per_count", ps.scale}};
  std::ofstream m(path.string() + ".json");
  if (!m) throw IoError("cannot open " + path.string() + ".json for writing");
  m << meta.dump(2) << '\n';
}

}  // namespace gradesim
