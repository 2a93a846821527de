#pragma once

#include <vector>

#include "kinoplan/common.hpp"
#include "kinoplan/occupancy_grid.hpp"

namespace kinoplan {

struct LidarConfig {
  int n_beams = 64;
  double max_range = 5.0;
  double noise_sigma = 0.1;
  double field_of_view = 2.0 * M_PI;
};

// Distance from origin along `angle` to the first occupied cell (map border
// included), capped at max_range. Origin outside the map throws.
double raycast(const OccupancyGrid& grid, const Vec2& origin, double angle,
               double max_range);

// One sweep of n_beams rays. Beam 0 points along the robot heading, beams
// advance counterclockwise by field_of_view / n_beams. Gaussian range noise
// is added per beam and the result clamped to [0, max_range].
std::vector<double> lidar_scan(const OccupancyGrid& grid, const Vec2& position,
                               double heading, const LidarConfig& cfg, Rng& rng);

}  // namespace kinoplan
