#pragma once

#include "kinoplan/common.hpp"
#include "kinoplan/dynamics.hpp"
#include "kinoplan/occupancy_grid.hpp"

namespace kinoplan {

// With probability p_goal_bias returns a state at the goal position (zero
// velocity, random orientation); otherwise a uniform collision-free pose with
// velocities drawn uniformly within the robot's bounds.
RobotState sample_free_state(const OccupancyGrid& grid, RobotKind kind, Rng& rng,
                             const GoalSpec& goal, double p_goal_bias,
                             double robot_radius = kRobotRadius);

// Uniform collision-free position (no goal bias, no velocity sampling).
Vec2 sample_free_position(const OccupancyGrid& grid, Rng& rng,
                          double robot_radius = kRobotRadius);

}  // namespace kinoplan
