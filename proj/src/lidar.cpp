#include "kinoplan/lidar.hpp"

#include <limits>
#include <stdexcept>

namespace kinoplan {

double raycast(const OccupancyGrid& grid, const Vec2& origin, double angle,
               double max_range) {
  if (!grid.contains(origin))
    throw std::invalid_argument("raycast origin outside the map");
  if (!(max_range > 0.0)) return 0.0;

  const double res = grid.resolution();
  int ix = std::min(std::max(grid.cell_x(origin.x), 0), grid.width_cells() - 1);
  int iy = std::min(std::max(grid.cell_y(origin.y), 0), grid.height_cells() - 1);
  if (grid.occupied(ix, iy)) return 0.0;

  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  double t_max_x = kInf, t_max_y = kInf, t_delta_x = kInf, t_delta_y = kInf;
  if (step_x > 0) t_max_x = ((ix + 1) * res - origin.x) / dx;
  if (step_x < 0) t_max_x = (ix * res - origin.x) / dx;
  if (step_y > 0) t_max_y = ((iy + 1) * res - origin.y) / dy;
  if (step_y < 0) t_max_y = (iy * res - origin.y) / dy;
  if (step_x != 0) t_delta_x = res / std::abs(dx);
  if (step_y != 0) t_delta_y = res / std::abs(dy);

  // Grid traversal: hop to the next cell boundary until a hit or the cap.
  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      ix += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      iy += step_y;
    }
    if (t >= max_range) return max_range;
    if (grid.occupied(ix, iy)) return t;
  }
}

std::vector<double> lidar_scan(const OccupancyGrid& grid, const Vec2& position,
                               double heading, const LidarConfig& cfg, Rng& rng) {
  std::vector<double> ranges(static_cast<size_t>(cfg.n_beams));
  const double beam_step = cfg.field_of_view / cfg.n_beams;
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
  for (int i = 0; i < cfg.n_beams; ++i) {
    double r = raycast(grid, position, heading + i * beam_step, cfg.max_range);
    if (cfg.noise_sigma > 0.0) r += noise(rng);
    ranges[static_cast<size_t>(i)] = clamp(r, 0.0, cfg.max_range);
  }
  return ranges;
}

}  // namespace kinoplan
