#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kinoplan/common.hpp"

namespace kinoplan {

// Rasterized 2D world. Cell (ix, iy) covers [ix*res, (ix+1)*res) x
// [iy*res, (iy+1)*res) in meters; everything outside the map is occupied.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width_cells, int height_cells, double resolution,
                std::vector<uint8_t> cells);

  int width_cells() const { return width_; }
  int height_cells() const { return height_; }
  double resolution() const { return resolution_; }
  double width_m() const { return width_ * resolution_; }
  double height_m() const { return height_ * resolution_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width_ && iy >= 0 && iy < height_;
  }
  // Out-of-map cells read as occupied.
  bool occupied(int ix, int iy) const {
    return !in_bounds(ix, iy) || cells_[static_cast<size_t>(iy) * width_ + ix] != 0;
  }
  bool contains(const Vec2& p) const {
    return p.x >= 0.0 && p.x <= width_m() && p.y >= 0.0 && p.y <= height_m();
  }
  int cell_x(double x) const { return static_cast<int>(std::floor(x / resolution_)); }
  int cell_y(double y) const { return static_cast<int>(std::floor(y / resolution_)); }
  Vec2 cell_center(int ix, int iy) const {
    return {(ix + 0.5) * resolution_, (iy + 0.5) * resolution_};
  }

  size_t occupied_count() const;
  size_t free_count() const;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  std::vector<uint8_t> cells_;  // row-major, row 0 at y=0
};

// Loads a map from the ASCII grid format (3-line header: width, height,
// resolution; then height rows of '#'/'.') or from a PGM P5 file with a
// sidecar "<path>.meta" carrying the resolution. The first text/pixel row is
// the top of the map (largest y). Malformed input throws with line/offset.
OccupancyGrid load_map(const std::string& path);

// True iff the disc of robot_radius at p lies inside the map and overlaps no
// occupied cell. Out-of-map positions are never free.
bool point_free(const OccupancyGrid& grid, const Vec2& p, double robot_radius);

}  // namespace kinoplan
