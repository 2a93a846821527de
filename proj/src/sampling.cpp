#include "kinoplan/sampling.hpp"

#include <stdexcept>

namespace kinoplan {

namespace {
constexpr int kMaxRejectionTries = 100000;

void sample_velocities(RobotState& s, Rng& rng) {
  switch (s.kind) {
    case RobotKind::DiffDrive:
      s.vel[0] = uniform(rng, -kDiffDriveMaxSpeed, kDiffDriveMaxSpeed);
      s.vel[1] = uniform(rng, -kDiffDriveMaxTurnRate, kDiffDriveMaxTurnRate);
      break;
    case RobotKind::Car:
      s.vel[0] = uniform(rng, 0.0, kCarMaxSpeed);
      s.vel[1] = uniform(rng, -kCarMaxSteer, kCarMaxSteer);
      break;
    case RobotKind::Asteroid: {
      // Uniform over the admissible speed disc.
      const double ang = uniform(rng, -M_PI, M_PI);
      const double mag = kAsteroidMaxSpeed * std::sqrt(uniform01(rng));
      s.vel[0] = mag * std::cos(ang);
      s.vel[1] = mag * std::sin(ang);
      break;
    }
  }
}

}  // namespace

Vec2 sample_free_position(const OccupancyGrid& grid, Rng& rng, double robot_radius) {
  if (grid.free_count() == 0)
    throw std::runtime_error("sample_free_position: map has no free cell");
  for (int i = 0; i < kMaxRejectionTries; ++i) {
    Vec2 p{uniform(rng, 0.0, grid.width_m()), uniform(rng, 0.0, grid.height_m())};
    if (point_free(grid, p, robot_radius)) return p;
  }
  throw std::runtime_error("sample_free_position: no collision-free position found");
}

RobotState sample_free_state(const OccupancyGrid& grid, RobotKind kind, Rng& rng,
                             const GoalSpec& goal, double p_goal_bias,
                             double robot_radius) {
  if (grid.free_count() == 0)
    throw std::runtime_error("sample_free_state: map has no free cell");

  RobotState s;
  s.kind = kind;
  if (uniform01(rng) < p_goal_bias) {
    s.x = goal.position.x;
    s.y = goal.position.y;
    s.theta = uniform(rng, -M_PI, M_PI);
    return s;
  }
  const Vec2 p = sample_free_position(grid, rng, robot_radius);
  s.x = p.x;
  s.y = p.y;
  s.theta = uniform(rng, -M_PI, M_PI);
  sample_velocities(s, rng);
  return s;
}

}  // namespace kinoplan
